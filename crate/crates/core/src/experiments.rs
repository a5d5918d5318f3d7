//! Experiment protocols: synthetic suites, the real-pair benchmark, the
//! ridge-sensitivity sweep, and the hyperparameter grid — all emitting
//! deterministic tab-separated tables.
//!
//! Every command is a pure function of [`RunConfig`]: dataset seeds derive
//! from (base seed, setting index, trial, dataset), score seeds follow the
//! dataset, and rows are assembled in a fixed order, so re-running a command
//! reproduces its table byte for byte. The one exception is the per-pair
//! detail file of the benchmark command, whose measured wall times are
//! inherently run-dependent.
//!
//! A failing cell (one setting × method combination) does not abort a run:
//! the row is emitted with an `error:` status and the command reports
//! [`RunOutcome::Partial`] so the caller can reflect it in the exit code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::datagen::{enumerate_settings, PairDataset, SettingSpec, SuiteKind};
use crate::dataio::{self, ResultRecord, TcepPair};
use crate::embedding::{ReferenceLaw, ReweightConfig};
use crate::error::{Error, Result};
use crate::infer::{
    evaluate_accuracy, evaluate_weighted_accuracy, infer_pair, Decision, Direction,
    DirectionDecision,
};
use crate::rng;
use crate::score::{IgciReference, Method, ScoreConfig};

/// The ridge values of the sensitivity sweep.
pub const LAMBDA_SWEEP: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 5.0, 10.0, 50.0];
/// Projection-rank grid of the hyperparameter search.
pub const GRID_RANKS: [usize; 5] = [5, 10, 20, 80, 100];
/// Barrier-weight grid of the hyperparameter search.
pub const GRID_LAMBDA_REGS: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

/// A method selection as given on the command line: the scorer plus any
/// variant the name itself pins down (reference measure, re-weighting law,
/// the n·λ ridge convention).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub method: Method,
    /// Reference measure forced by `igci-u` / `igci-n`.
    igci_reference: Option<IgciReference>,
    /// Re-weighting law forced by an `rw-` name; `None` inherits the
    /// run-level re-weighting setting.
    reweight: Option<ReferenceLaw>,
    /// `Some(true)` for the `kcdc-nl` alias.
    kcdc_n_lambda: Option<bool>,
}

impl MethodSpec {
    pub fn plain(method: Method) -> MethodSpec {
        MethodSpec {
            method,
            igci_reference: None,
            reweight: None,
            kcdc_n_lambda: None,
        }
    }

    /// Parse one method name. Externally computed baselines are recognized
    /// but rejected as unsupported, pointing at the decision-import path.
    pub fn parse(name: &str) -> Result<MethodSpec> {
        let spec = |method, igci, rw, nl| MethodSpec {
            method,
            igci_reference: igci,
            reweight: rw,
            kcdc_n_lambda: nl,
        };
        match name {
            "kiim-ht" => Ok(spec(Method::KiimHt, None, None, None)),
            "kcdc" => Ok(spec(Method::Kcdc, None, None, Some(false))),
            "kcdc-nl" => Ok(spec(Method::Kcdc, None, None, Some(true))),
            "kiim" => Ok(spec(Method::Kiim, None, None, None)),
            "igci" => Ok(spec(Method::Igci, None, None, None)),
            "igci-u" => Ok(spec(Method::Igci, Some(IgciReference::Uniform), None, None)),
            "igci-n" => Ok(spec(Method::Igci, Some(IgciReference::Gaussian), None, None)),
            "rw-kiim-ht-n" => Ok(spec(Method::KiimHt, None, Some(ReferenceLaw::Gaussian), None)),
            "rw-kiim-ht-l" => Ok(spec(Method::KiimHt, None, Some(ReferenceLaw::Laplace), None)),
            "rw-kiim-n" => Ok(spec(Method::Kiim, None, Some(ReferenceLaw::Gaussian), None)),
            "rw-kiim-l" => Ok(spec(Method::Kiim, None, Some(ReferenceLaw::Laplace), None)),
            "anm" | "lingam" => Err(Error::Unsupported(name.to_string())),
            other => Err(Error::InvalidInput(format!(
                "unknown method `{other}`; expected one of kiim-ht, kcdc, kcdc-nl, kiim, \
                 igci, igci-u, igci-n, rw-kiim-ht-n, rw-kiim-ht-l, rw-kiim-n, rw-kiim-l"
            ))),
        }
    }

    /// The score configuration this method runs with, given the run-level
    /// base configuration.
    pub fn configure(&self, base: &ScoreConfig) -> ScoreConfig {
        let mut cfg = base.clone();
        if let Some(reference) = self.igci_reference {
            cfg.igci_reference = reference;
        }
        if let Some(law) = self.reweight {
            cfg.reweight = Some(ReweightConfig::new(law));
        }
        if let Some(nl) = self.kcdc_n_lambda {
            cfg.kcdc_n_lambda = nl;
        }
        cfg
    }

    /// Canonical label under the given base configuration. Inherited options
    /// that change the scorer's behavior show up in the label, so a table row
    /// always names what actually ran: `kiim` under a run-level Gaussian
    /// re-weighting reads `rw-kiim-n`.
    pub fn label(&self, base: &ScoreConfig) -> String {
        let cfg = self.configure(base);
        match self.method {
            Method::Igci => match cfg.igci_reference {
                IgciReference::Uniform => "igci-u".into(),
                IgciReference::Gaussian => "igci-n".into(),
            },
            Method::Kcdc => if cfg.kcdc_n_lambda { "kcdc-nl" } else { "kcdc" }.into(),
            Method::KiimHt | Method::Kiim => {
                let stem = self.method.name();
                match cfg.reweight.as_ref().map(|rw| rw.reference) {
                    None => stem.into(),
                    Some(ReferenceLaw::Gaussian) => format!("rw-{stem}-n"),
                    Some(ReferenceLaw::Laplace) => format!("rw-{stem}-l"),
                }
            }
        }
    }
}

/// Parse a method list, splitting comma-separated entries.
pub fn parse_method_list(names: &[String]) -> Result<Vec<MethodSpec>> {
    let mut specs = Vec::new();
    for name in names {
        for part in name.split(',') {
            let part = part.trim();
            if !part.is_empty() {
                specs.push(MethodSpec::parse(part)?);
            }
        }
    }
    if specs.is_empty() {
        return Err(Error::InvalidInput("method list is empty".into()));
    }
    Ok(specs)
}

/// Everything a command run depends on. All fields are echoed into the table
/// header, so a results file reconstructs its run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub methods: Vec<MethodSpec>,
    pub score: ScoreConfig,
    pub trials: u64,
    pub datasets_per_trial: u64,
    /// Samples per dataset (synthetic commands).
    pub n: usize,
    /// Output path of the main table.
    pub out: PathBuf,
    /// Which synthetic suite sensitivity/grid commands run over.
    pub suite: SuiteKind,
    /// Restrict a suite to these setting labels (`None` = every setting).
    pub settings: Option<Vec<String>>,
    pub lambdas: Vec<f64>,
    pub grid_ranks: Vec<usize>,
    pub grid_lambda_regs: Vec<f64>,
    pub tcep_dir: Option<PathBuf>,
    pub downsample_cap: usize,
    pub import_decisions: Option<PathBuf>,
    pub weighted: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            methods: vec![MethodSpec::plain(Method::KiimHt)],
            score: ScoreConfig::default(),
            trials: 5,
            datasets_per_trial: 50,
            n: 100,
            out: PathBuf::from("results.tsv"),
            suite: SuiteKind::Scalar,
            settings: None,
            lambdas: LAMBDA_SWEEP.to_vec(),
            grid_ranks: GRID_RANKS.to_vec(),
            grid_lambda_regs: GRID_LAMBDA_REGS.to_vec(),
            tcep_dir: None,
            downsample_cap: 400,
            import_decisions: None,
            weighted: false,
        }
    }
}

impl RunConfig {
    /// The acceptance-testing preset: 1 trial of 20 datasets per setting.
    pub fn desk_scale(mut self) -> Self {
        self.trials = 1;
        self.datasets_per_trial = 20;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.score.validate()?;
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("method list is empty".into()));
        }
        if self.trials == 0 || self.datasets_per_trial == 0 {
            return Err(Error::InvalidInput(
                "trials and datasets-per-trial must be at least 1".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 samples per dataset, got {}",
                self.n
            )));
        }
        if self.lambdas.is_empty() {
            return Err(Error::InvalidInput("lambda sweep list is empty".into()));
        }
        if self.grid_ranks.is_empty() || self.grid_lambda_regs.is_empty() {
            return Err(Error::InvalidInput("hyperparameter grid sets are empty".into()));
        }
        if self.downsample_cap < 2 {
            return Err(Error::InvalidInput(format!(
                "downsample cap must be >= 2, got {}",
                self.downsample_cap
            )));
        }
        Ok(())
    }
}

/// Whether a run finished every cell or had to mark some as errored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Complete,
    Partial,
}

/// A tab-separated results table: `# key = value` provenance lines, a header
/// row, then data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Table {
        Table {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            let _ = writeln!(out, "# {key} = {value}");
        }
        let _ = writeln!(out, "{}", self.columns.join("\t"));
        for row in &self.rows {
            debug_assert_eq!(row.len(), self.columns.len());
            let _ = writeln!(out, "{}", row.join("\t"));
        }
        out
    }

    /// Atomically replace `path` with this table.
    pub fn write(&self, path: &Path) -> Result<()> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let staged = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
            .map_err(Error::io(path))?;
        std::fs::write(staged.path(), self.to_tsv()).map_err(Error::io(staged.path()))?;
        staged.persist(path).map_err(|e| Error::io(path)(e.error))?;
        Ok(())
    }
}

fn fmt_pct(value: f64) -> String {
    format!("{value:.2}")
}

fn fmt_list<T: std::fmt::LowerExp>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Meta lines shared by every command: the full run configuration.
fn base_meta(command: &str, cfg: &RunConfig) -> Vec<(String, String)> {
    let methods = cfg
        .methods
        .iter()
        .map(|m| m.label(&cfg.score))
        .collect::<Vec<_>>()
        .join(",");
    let mut meta = vec![
        ("command".to_string(), command.to_string()),
        ("methods".to_string(), methods),
        ("trials".to_string(), cfg.trials.to_string()),
        (
            "datasets_per_trial".to_string(),
            cfg.datasets_per_trial.to_string(),
        ),
        ("n".to_string(), cfg.n.to_string()),
        ("seed".to_string(), cfg.score.seed.to_string()),
        ("score".to_string(), cfg.score.canonical()),
        ("digest".to_string(), cfg.score.digest()),
    ];
    if let Some(labels) = &cfg.settings {
        meta.push(("settings".to_string(), labels.join(",")));
    }
    meta
}

/// Per-trial accuracies of one (setting, method, config) cell.
fn cell_accuracies(
    setting: &SettingSpec,
    setting_index: u64,
    n: usize,
    method: Method,
    cfg: &ScoreConfig,
    base_seed: u64,
    trials: u64,
    datasets: u64,
) -> Result<Vec<f64>> {
    let jobs: Vec<(u64, u64)> = (0..trials)
        .flat_map(|t| (0..datasets).map(move |d| (t, d)))
        .collect();
    let outcomes: Vec<Result<bool>> = jobs
        .par_iter()
        .map(|&(trial, dataset)| {
            // Dataset identity depends only on (seed, setting, trial,
            // dataset): sweeping a hyperparameter re-scores the same data.
            let dataset_seed = rng::mix(&[base_seed, setting_index, trial, dataset]);
            let data = setting.generate(n, dataset_seed)?;
            let truth = data.truth.expect("synthetic data carries ground truth");
            let mut cfg_d = cfg.clone();
            cfg_d.seed = dataset_seed;
            let decision = infer_pair(&data, method, &cfg_d)?;
            Ok(decision.decision.matches(truth))
        })
        .collect();

    let mut correct = vec![0u64; trials as usize];
    for (&(trial, _), outcome) in jobs.iter().zip(outcomes) {
        if outcome? {
            correct[trial as usize] += 1;
        }
    }
    Ok(correct
        .iter()
        .map(|&c| c as f64 / datasets as f64)
        .collect())
}

/// Mean and population standard deviation, in percent.
fn mean_sd_pct(accuracies: &[f64]) -> (f64, f64) {
    let k = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / k;
    let var = accuracies.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / k;
    (100.0 * mean, 100.0 * var.sqrt())
}

/// The suite's settings with their enumeration indices, optionally filtered
/// by label. Indices always refer to the full enumeration, so a filtered run
/// reproduces the corresponding cells of a full run exactly.
fn selected_settings(kind: SuiteKind, filter: Option<&[String]>) -> Result<Vec<(u64, SettingSpec)>> {
    let all = enumerate_settings(kind);
    let indexed: Vec<(u64, SettingSpec)> = all.into_iter().zip(0u64..).map(|(s, i)| (i, s)).collect();
    match filter {
        None => Ok(indexed),
        Some(labels) => {
            let valid: Vec<String> = indexed.iter().map(|(_, s)| s.label()).collect();
            for label in labels {
                if !valid.contains(label) {
                    return Err(Error::InvalidInput(format!(
                        "unknown setting `{label}`; valid settings: {}",
                        valid.join(", ")
                    )));
                }
            }
            Ok(indexed
                .into_iter()
                .filter(|(_, s)| labels.contains(&s.label()))
                .collect())
        }
    }
}

fn error_status(err: &Error) -> String {
    format!("error: {err}")
}

/// Shared body of the two synthetic-suite commands.
fn synthetic_suite(command: &'static str, kind: SuiteKind, cfg: &RunConfig) -> Result<(Table, RunOutcome)> {
    cfg.validate()?;
    let settings = selected_settings(kind, cfg.settings.as_deref())?;
    let mut table = Table::new(vec![
        "setting", "method", "accuracy", "sd", "trials", "datasets_per_trial", "n", "status",
    ]);
    table.meta = base_meta(command, cfg);
    let mut outcome = RunOutcome::Complete;
    for (index, setting) in &settings {
        for m in &cfg.methods {
            let label = m.label(&cfg.score);
            let sc = m.configure(&cfg.score);
            let mut row = vec![setting.label(), label.clone()];
            match cell_accuracies(
                setting,
                *index,
                cfg.n,
                m.method,
                &sc,
                cfg.score.seed,
                cfg.trials,
                cfg.datasets_per_trial,
            ) {
                Ok(accs) => {
                    let (mean, sd) = mean_sd_pct(&accs);
                    row.extend([fmt_pct(mean), fmt_pct(sd)]);
                    row.extend(cell_tail(cfg, "ok".into()));
                }
                Err(err) => {
                    log::warn!("{command} {} {label}: {err}", setting.label());
                    outcome = RunOutcome::Partial;
                    row.extend(["-".into(), "-".into()]);
                    row.extend(cell_tail(cfg, error_status(&err)));
                }
            }
            table.rows.push(row);
        }
    }
    table.write(&cfg.out)?;
    Ok((table, outcome))
}

fn cell_tail(cfg: &RunConfig, status: String) -> [String; 4] {
    [
        cfg.trials.to_string(),
        cfg.datasets_per_trial.to_string(),
        cfg.n.to_string(),
        status,
    ]
}

/// Scalar synthetic benchmark: the ten mechanism × noise settings.
pub fn cmd_synth(cfg: &RunConfig) -> Result<(Table, RunOutcome)> {
    synthetic_suite("synth", SuiteKind::Scalar, cfg)
}

/// Two-dimensional synthetic benchmark: the twenty mechanism-pair settings.
/// Run with a small `n` (the benchmark's point is tiny-sample behavior).
pub fn cmd_synth2d(cfg: &RunConfig) -> Result<(Table, RunOutcome)> {
    synthetic_suite("synth2d", SuiteKind::TwoDim, cfg)
}

/// Ridge-sensitivity sweep: every method × λ × setting. A plain norm-variance
/// entry is automatically accompanied by its n·λ variant so the two ridge
/// conventions can be compared side by side.
pub fn cmd_lambda_sweep(cfg: &RunConfig) -> Result<(Table, RunOutcome)> {
    cfg.validate()?;
    let settings = selected_settings(cfg.suite, cfg.settings.as_deref())?;

    let mut methods = cfg.methods.clone();
    let plain_kcdc = MethodSpec::parse("kcdc").expect("kcdc parses");
    let nl_kcdc = MethodSpec::parse("kcdc-nl").expect("kcdc-nl parses");
    if let Some(pos) = methods.iter().position(|m| *m == plain_kcdc) {
        if !methods.contains(&nl_kcdc) {
            methods.insert(pos + 1, nl_kcdc);
        }
    }

    let mut table = Table::new(vec![
        "setting", "method", "lambda", "accuracy", "sd", "trials", "datasets_per_trial", "n",
        "status",
    ]);
    table.meta = base_meta("lambda-sweep", cfg);
    table.meta.push(("suite".to_string(), suite_name(cfg.suite).to_string()));
    table.meta.push(("lambdas".to_string(), fmt_list(&cfg.lambdas)));
    let mut outcome = RunOutcome::Complete;
    for (index, setting) in &settings {
        for m in &methods {
            let label = m.label(&cfg.score);
            for &lambda in &cfg.lambdas {
                let mut sc = m.configure(&cfg.score);
                sc.kernel.reg = lambda;
                let mut row = vec![setting.label(), label.clone(), format!("{lambda:e}")];
                match cell_accuracies(
                    setting,
                    *index,
                    cfg.n,
                    m.method,
                    &sc,
                    cfg.score.seed,
                    cfg.trials,
                    cfg.datasets_per_trial,
                ) {
                    Ok(accs) => {
                        let (mean, sd) = mean_sd_pct(&accs);
                        row.extend([fmt_pct(mean), fmt_pct(sd)]);
                        row.extend(cell_tail(cfg, "ok".into()));
                    }
                    Err(err) => {
                        log::warn!("lambda-sweep {} {label} λ={lambda:e}: {err}", setting.label());
                        outcome = RunOutcome::Partial;
                        row.extend(["-".into(), "-".into()]);
                        row.extend(cell_tail(cfg, error_status(&err)));
                    }
                }
                table.rows.push(row);
            }
        }
    }
    table.write(&cfg.out)?;
    Ok((table, outcome))
}

fn suite_name(kind: SuiteKind) -> &'static str {
    match kind {
        SuiteKind::Scalar => "scalar",
        SuiteKind::TwoDim => "twodim",
    }
}

/// Hyperparameter grid for the trained score: rank × barrier-weight cells per
/// setting, each cell a full accuracy run, plus one summary row per setting
/// with the mean and spread across cells.
pub fn cmd_hypergrid(cfg: &RunConfig) -> Result<(Table, RunOutcome)> {
    cfg.validate()?;
    let settings = selected_settings(cfg.suite, cfg.settings.as_deref())?;
    let mut table = Table::new(vec![
        "setting", "rank", "lambda_reg", "kind", "accuracy", "sd", "trials", "datasets_per_trial",
        "n", "status",
    ]);
    table.meta = base_meta("hypergrid", cfg);
    table.meta.push(("suite".to_string(), suite_name(cfg.suite).to_string()));
    table.meta.push(("grid_ranks".to_string(), {
        let ranks: Vec<String> = cfg.grid_ranks.iter().map(|r| r.to_string()).collect();
        ranks.join(",")
    }));
    table.meta.push((
        "grid_lambda_regs".to_string(),
        fmt_list(&cfg.grid_lambda_regs),
    ));
    let mut outcome = RunOutcome::Complete;
    for (index, setting) in &settings {
        let mut cell_means = Vec::with_capacity(cfg.grid_ranks.len() * cfg.grid_lambda_regs.len());
        let mut failures = 0usize;
        for &rank in &cfg.grid_ranks {
            for &lambda_reg in &cfg.grid_lambda_regs {
                let mut sc = cfg.score.clone();
                sc.rank = rank;
                sc.loss.lambda_reg = lambda_reg;
                let mut row = vec![
                    setting.label(),
                    rank.to_string(),
                    format!("{lambda_reg:e}"),
                    "cell".to_string(),
                ];
                match cell_accuracies(
                    setting,
                    *index,
                    cfg.n,
                    Method::KiimHt,
                    &sc,
                    cfg.score.seed,
                    cfg.trials,
                    cfg.datasets_per_trial,
                ) {
                    Ok(accs) => {
                        let (mean, sd) = mean_sd_pct(&accs);
                        cell_means.push(mean / 100.0);
                        row.extend([fmt_pct(mean), fmt_pct(sd)]);
                        row.extend(cell_tail(cfg, "ok".into()));
                    }
                    Err(err) => {
                        log::warn!(
                            "hypergrid {} r={rank} λ_reg={lambda_reg:e}: {err}",
                            setting.label()
                        );
                        outcome = RunOutcome::Partial;
                        failures += 1;
                        row.extend(["-".into(), "-".into()]);
                        row.extend(cell_tail(cfg, error_status(&err)));
                    }
                }
                table.rows.push(row);
            }
        }
        // Cross-cell robustness summary for this setting.
        let mut row = vec![setting.label(), "-".into(), "-".into(), "summary".into()];
        if cell_means.is_empty() {
            row.extend(["-".into(), "-".into()]);
            row.extend(cell_tail(cfg, "error: all cells failed".into()));
        } else {
            let (mean, sd) = mean_sd_pct(&cell_means);
            let status = if failures == 0 {
                "ok".to_string()
            } else {
                format!("partial ({} of {} cells failed)", failures, cell_means.len() + failures)
            };
            row.extend([fmt_pct(mean), fmt_pct(sd)]);
            row.extend(cell_tail(cfg, status));
        }
        table.rows.push(row);
    }
    table.write(&cfg.out)?;
    Ok((table, outcome))
}

/// The per-pair detail file written next to a benchmark table:
/// `tcep.tsv` → `tcep.pairs.tsv`.
pub fn pairs_detail_path(out: &Path) -> PathBuf {
    out.with_extension("pairs.tsv")
}

/// Real-pair benchmark: load the directory, cap each pair's sample count,
/// score every (pair, method), and report per-method accuracy. Per-pair
/// decisions (with wall times) go to the detail file; externally computed
/// decisions can be merged in as additional comparison rows.
pub fn cmd_tcep(cfg: &RunConfig) -> Result<(Table, RunOutcome)> {
    cfg.validate()?;
    let dir = cfg.tcep_dir.as_ref().ok_or_else(|| {
        Error::InvalidInput("benchmark command needs --tcep-dir".into())
    })?;
    let pairs = dataio::load_tcep(dir)?;
    let capped: Vec<TcepPair> = pairs
        .iter()
        .enumerate()
        .map(|(i, p)| dataio::downsample(p, cfg.downsample_cap, rng::mix(&[cfg.score.seed, i as u64])))
        .collect::<Result<_>>()?;

    let weighted_col = cfg.weighted;
    let mut columns = vec!["method", "accuracy"];
    if weighted_col {
        columns.push("weighted_accuracy");
    }
    columns.extend(["correct", "incorrect", "undecided", "pairs", "status"]);
    let mut table = Table::new(columns);
    table.meta = base_meta("tcep", cfg);
    table.meta.push(("tcep_dir".to_string(), dir.display().to_string()));
    table.meta.push(("pairs_loaded".to_string(), capped.len().to_string()));
    table.meta.push(("downsample_cap".to_string(), cfg.downsample_cap.to_string()));
    table.meta.push(("weighted".to_string(), cfg.weighted.to_string()));

    let mut outcome = RunOutcome::Complete;
    let mut records: Vec<ResultRecord> = Vec::new();
    for m in &cfg.methods {
        let label = m.label(&cfg.score);
        let sc = m.configure(&cfg.score);
        let digest = sc.digest();
        let outs: Vec<(usize, Result<(DirectionDecision, f64)>)> = capped
            .par_iter()
            .enumerate()
            .map(|(i, pair)| {
                let mut cfg_p = sc.clone();
                cfg_p.seed = rng::mix(&[cfg.score.seed, i as u64]);
                let start = Instant::now();
                let result = infer_pair(&pair.data, m.method, &cfg_p)
                    .map(|d| (d, start.elapsed().as_secs_f64()));
                (i, result)
            })
            .collect();

        let mut decisions = Vec::new();
        let mut truths = Vec::new();
        let mut weights = Vec::new();
        let mut failures = 0usize;
        for (i, out) in outs {
            let pair = &capped[i];
            match out {
                Ok((decision, wall)) => {
                    records.push(ResultRecord {
                        id: pair.id.clone(),
                        method: label.clone(),
                        cfg_digest: digest.clone(),
                        decision: decision.decision,
                        score_xy: decision.score_xy,
                        score_yx: decision.score_yx,
                        wall_time_s: wall,
                        seed: rng::mix(&[cfg.score.seed, i as u64]),
                    });
                    decisions.push(decision.decision);
                    truths.push(Direction::XtoY);
                    weights.push(pair.weight);
                }
                Err(err) => {
                    log::warn!("tcep pair {} {label}: {err}", pair.id);
                    failures += 1;
                }
            }
        }
        if failures > 0 {
            outcome = RunOutcome::Partial;
        }
        table
            .rows
            .push(accuracy_row(&label, &decisions, &truths, &weights, weighted_col, failures, capped.len())?);
    }

    if let Some(path) = &cfg.import_decisions {
        import_decision_rows(path, &capped, weighted_col, &mut table)?;
    }

    dataio::write_results_with_meta(&records, &table.meta, &pairs_detail_path(&cfg.out))?;
    table.write(&cfg.out)?;
    Ok((table, outcome))
}

/// One accuracy row of the benchmark table.
fn accuracy_row(
    label: &str,
    decisions: &[Decision],
    truths: &[Direction],
    weights: &[f64],
    weighted_col: bool,
    failures: usize,
    total_pairs: usize,
) -> Result<Vec<String>> {
    let mut row = vec![label.to_string()];
    if decisions.is_empty() {
        row.push("-".into());
        if weighted_col {
            row.push("-".into());
        }
        row.extend(["-".into(), "-".into(), "-".into(), "0".into()]);
        row.push("error: no pairs scored".into());
        return Ok(row);
    }
    let acc = evaluate_accuracy(decisions, truths)?;
    row.push(fmt_pct(100.0 * acc.accuracy));
    if weighted_col {
        let w = evaluate_weighted_accuracy(decisions, truths, weights)?;
        row.push(fmt_pct(100.0 * w.accuracy));
    }
    row.extend([
        acc.correct.to_string(),
        acc.incorrect.to_string(),
        acc.undecided.to_string(),
        acc.total.to_string(),
    ]);
    row.push(if failures == 0 {
        "ok".to_string()
    } else {
        format!("partial ({} of {total_pairs} pairs failed)", failures)
    });
    Ok(row)
}

/// Merge externally computed decisions (a results file keyed by pair id)
/// into the benchmark table as extra comparison rows.
fn import_decision_rows(
    path: &Path,
    pairs: &[TcepPair],
    weighted_col: bool,
    table: &mut Table,
) -> Result<()> {
    let imported = dataio::read_results(path)?;
    let weight_by_id: std::collections::HashMap<&str, f64> =
        pairs.iter().map(|p| (p.id.as_str(), p.weight)).collect();

    // Group records per method, preserving first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut by_method: std::collections::HashMap<String, Vec<&ResultRecord>> =
        std::collections::HashMap::new();
    for record in &imported {
        if !by_method.contains_key(&record.method) {
            order.push(record.method.clone());
        }
        by_method.entry(record.method.clone()).or_default().push(record);
    }

    for method in order {
        let records = &by_method[&method];
        let mut decisions = Vec::new();
        let mut truths = Vec::new();
        let mut weights = Vec::new();
        let mut unmatched = 0usize;
        for record in records {
            match weight_by_id.get(record.id.as_str()) {
                Some(&w) => {
                    decisions.push(record.decision);
                    truths.push(Direction::XtoY);
                    weights.push(w);
                }
                None => unmatched += 1,
            }
        }
        if unmatched > 0 {
            log::warn!(
                "import {}: {unmatched} of {} records match no loaded pair",
                path.display(),
                records.len()
            );
        }
        let mut row = accuracy_row(
            &format!("{method} (imported)"),
            &decisions,
            &truths,
            &weights,
            weighted_col,
            0,
            pairs.len(),
        )?;
        let status = row.last_mut().expect("accuracy rows end with a status");
        if *status == "ok" {
            *status = format!("imported ({} of {} records matched)", decisions.len(), records.len());
        }
        table.rows.push(row);
    }
    Ok(())
}

/// Split a parsed pair file into cause and effect blocks, honoring a
/// `# columns: x[a] y[b]` annotation when one is present. Without the
/// annotation the file must have exactly two columns.
fn split_pair_columns(path: &Path, table: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let mut split: Option<(usize, usize)> = None;
    for line in text.lines() {
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("# columns:") {
            let parse = |part: &str, tag: char| -> Option<usize> {
                let part = part.trim();
                part.strip_prefix(tag)?
                    .strip_prefix('[')?
                    .strip_suffix(']')?
                    .parse()
                    .ok()
            };
            let mut parts = rest.split_whitespace();
            let dx = parts.next().and_then(|p| parse(p, 'x'));
            let dy = parts.next().and_then(|p| parse(p, 'y'));
            match (dx, dy) {
                (Some(dx), Some(dy)) if dx > 0 && dy > 0 => split = Some((dx, dy)),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "{}: malformed `# columns:` annotation `{trimmed}`",
                        path.display()
                    )))
                }
            }
            break;
        }
    }
    let (dx, dy) = match split {
        Some(pair) => pair,
        None if table.ncols() == 2 => (1, 1),
        None => {
            return Err(Error::InvalidInput(format!(
                "{}: a {}-column file needs a `# columns: x[a] y[b]` annotation",
                path.display(),
                table.ncols()
            )))
        }
    };
    if dx + dy != table.ncols() {
        return Err(Error::InvalidInput(format!(
            "{}: annotation says x[{dx}] y[{dy}] but the file has {} columns",
            path.display(),
            table.ncols()
        )));
    }
    let x = DMatrix::from_fn(table.nrows(), dx, |i, j| table[(i, j)]);
    let y = DMatrix::from_fn(table.nrows(), dy, |i, j| table[(i, dx + j)]);
    Ok((x, y))
}

/// Score one pair file in both directions and decide.
pub fn cmd_infer(file: &Path, method: &MethodSpec, cfg: &ScoreConfig) -> Result<DirectionDecision> {
    cfg.validate()?;
    let raw = dataio::parse_pair_file(file)?;
    let (x, y) = split_pair_columns(file, &raw)?;
    let dataset = PairDataset {
        x,
        y,
        truth: None,
        provenance: format!("file:{}", file.display()),
    };
    infer_pair(&dataset, method.method, &method.configure(cfg))
}
