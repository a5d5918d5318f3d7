//! Command-line driver: runs the experiment protocols and single-pair
//! inference, writing deterministic tab-separated tables.
//!
//! Exit codes: for `infer`, 0 = x→y, 1 = y→x, 2 = undecided. For every
//! command, 3 = usage error, 4 = the run finished but some cells errored,
//! 5 = the run failed outright.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kernel_deviance::datagen::SuiteKind;
use kernel_deviance::embedding::{ReferenceLaw, ReweightConfig};
use kernel_deviance::error::{Error, Result};
use kernel_deviance::experiments::{
    cmd_hypergrid, cmd_infer, cmd_lambda_sweep, cmd_synth, cmd_synth2d, cmd_tcep,
    parse_method_list, MethodSpec, RunConfig, RunOutcome, Table,
};
use kernel_deviance::infer::Decision;
use kernel_deviance::score::ScoreConfig;

const EXIT_UNDECIDED: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_PARTIAL: u8 = 4;
const EXIT_FAILED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "kdcd",
    version,
    about = "Bivariate causal direction inference by kernel-deviance scores",
    after_help = "Tables are written to --out (default: <command>.tsv under $KDCD_OUT_DIR or .) \
                  and echoed to stdout."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar synthetic benchmark: 10 mechanism × noise settings.
    Synth(RunArgs),
    /// Two-dimensional synthetic benchmark: 20 mechanism-pair settings.
    Synth2d(RunArgs),
    /// Real cause-effect pair benchmark from a local directory.
    Tcep(TcepArgs),
    /// Accuracy across the ridge values λ ∈ {1e-3 … 50} per method and setting.
    LambdaSweep(RunArgs),
    /// Rank × barrier-weight grid for the trained projection score.
    Hypergrid(RunArgs),
    /// Decide the causal direction of one pair file.
    Infer(InferArgs),
}

#[derive(Args, Clone)]
struct ScoreArgs {
    /// Scoring method (repeatable, comma-separable): kiim-ht, kcdc, kcdc-nl,
    /// kiim, igci-u, igci-n, rw-kiim-ht-n, rw-kiim-ht-l, rw-kiim-n, rw-kiim-l.
    #[arg(long = "method")]
    method: Vec<String>,
    /// Kernel ridge λ (lambda-sweep: repeatable, overriding the sweep list).
    #[arg(long)]
    lambda: Vec<f64>,
    /// Projection barrier weight λ_reg (hypergrid: repeatable, overriding the grid).
    #[arg(long)]
    lambda_reg: Vec<f64>,
    /// Per-sample projection rank r (hypergrid: repeatable, overriding the grid).
    #[arg(long)]
    rank: Vec<usize>,
    /// Hidden width of the projection network.
    #[arg(long)]
    hidden: Option<usize>,
    /// Optimizer iterations for the trained score.
    #[arg(long)]
    iters: Option<usize>,
    /// Base seed; datasets and per-direction optimizations derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Importance re-weighting toward a reference law.
    #[arg(long, value_parser = ["none", "gaussian", "laplace"])]
    reweight: Option<String>,
    /// Use the n·λ ridge convention in the norm-variance score.
    #[arg(long)]
    kcdc_n_lambda: bool,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[command(flatten)]
    score: ScoreArgs,
    /// Independent trials per setting (default 5).
    #[arg(long)]
    trials: Option<u64>,
    /// Datasets per trial (default 50).
    #[arg(long)]
    datasets_per_trial: Option<u64>,
    /// Samples per dataset (default 100; 5 for synth2d).
    #[arg(long)]
    n: Option<usize>,
    /// Output table path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Acceptance-scale preset: 1 trial × 20 datasets per setting.
    #[arg(long)]
    desk_scale: bool,
    /// Which synthetic suite lambda-sweep and hypergrid run over.
    #[arg(long, value_parser = ["scalar", "twodim"])]
    suite: Option<String>,
    /// Restrict to these setting labels, e.g. anm-1:normal (repeatable).
    #[arg(long = "setting")]
    settings: Vec<String>,
}

#[derive(Args)]
struct TcepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Benchmark directory containing pairmeta.txt and pairNNNN.txt files.
    #[arg(long)]
    tcep_dir: PathBuf,
    /// Sample cap per pair (seeded shuffle, first cap kept).
    #[arg(long, default_value_t = 400)]
    downsample_cap: usize,
    /// Merge externally computed decisions (a results file) as extra rows.
    #[arg(long)]
    import_decisions: Option<PathBuf>,
    /// Also report weight-averaged accuracy using the metadata weights.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args)]
struct InferArgs {
    /// Pair file: two whitespace-separated columns, or more with a
    /// `# columns: x[a] y[b]` annotation.
    file: PathBuf,
    #[command(flatten)]
    score: ScoreArgs,
}

/// Translate the score flags into a ScoreConfig. `sweeping`/`gridding`
/// commands consume the repeatable λ / (rank, λ_reg) lists elsewhere; for the
/// rest, more than one value is a usage error.
fn build_score_config(args: &ScoreArgs, sweeping: bool, gridding: bool) -> Result<ScoreConfig> {
    let mut cfg = ScoreConfig::default();
    let single = |name: &str, values: &[f64]| -> Result<Option<f64>> {
        match values {
            [] => Ok(None),
            [v] => Ok(Some(*v)),
            _ => Err(Error::InvalidInput(format!(
                "--{name} may be given once for this command"
            ))),
        }
    };
    if !sweeping {
        if let Some(lambda) = single("lambda", &args.lambda)? {
            cfg.kernel.reg = lambda;
        }
    }
    if !gridding {
        if let Some(lambda_reg) = single("lambda-reg", &args.lambda_reg)? {
            cfg.loss.lambda_reg = lambda_reg;
        }
        match args.rank.as_slice() {
            [] => {}
            [r] => cfg.rank = *r,
            _ => {
                return Err(Error::InvalidInput(
                    "--rank may be given once for this command".into(),
                ))
            }
        }
    }
    if let Some(hidden) = args.hidden {
        cfg.hidden = hidden;
    }
    if let Some(iters) = args.iters {
        cfg.loss.iterations = iters;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.reweight = match args.reweight.as_deref() {
        None | Some("none") => None,
        Some("gaussian") => Some(ReweightConfig::new(ReferenceLaw::Gaussian)),
        Some("laplace") => Some(ReweightConfig::new(ReferenceLaw::Laplace)),
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "unknown re-weighting reference `{other}`"
            )))
        }
    };
    cfg.kcdc_n_lambda = args.kcdc_n_lambda;
    cfg.validate()?;
    Ok(cfg)
}

/// Default output location: `<command>.tsv` in $KDCD_OUT_DIR (or the working
/// directory), unless --out says otherwise.
fn output_path(out: &Option<PathBuf>, command: &str) -> PathBuf {
    match out {
        Some(path) => path.clone(),
        None => {
            let dir = std::env::var_os("KDCD_OUT_DIR").map(PathBuf::from);
            let file = format!("{command}.tsv");
            match dir {
                Some(dir) => dir.join(file),
                None => PathBuf::from(file),
            }
        }
    }
}

fn build_run_config(
    args: &RunArgs,
    command: &str,
    default_methods: &[&str],
    default_n: usize,
) -> Result<RunConfig> {
    let sweeping = command == "lambda-sweep";
    let gridding = command == "hypergrid";
    let mut cfg = RunConfig {
        score: build_score_config(&args.score, sweeping, gridding)?,
        out: output_path(&args.out, command),
        n: args.n.unwrap_or(default_n),
        ..RunConfig::default()
    };
    cfg.methods = if args.score.method.is_empty() {
        default_methods
            .iter()
            .map(|name| MethodSpec::parse(name))
            .collect::<Result<_>>()?
    } else {
        parse_method_list(&args.score.method)?
    };
    if args.desk_scale {
        cfg = cfg.desk_scale();
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(datasets) = args.datasets_per_trial {
        cfg.datasets_per_trial = datasets;
    }
    if sweeping && !args.score.lambda.is_empty() {
        cfg.lambdas = args.score.lambda.clone();
    }
    if gridding {
        if !args.score.rank.is_empty() {
            cfg.grid_ranks = args.score.rank.clone();
        }
        if !args.score.lambda_reg.is_empty() {
            cfg.grid_lambda_regs = args.score.lambda_reg.clone();
        }
    }
    cfg.suite = match args.suite.as_deref() {
        None | Some("scalar") => SuiteKind::Scalar,
        Some("twodim") => SuiteKind::TwoDim,
        Some(other) => {
            return Err(Error::InvalidInput(format!("unknown suite `{other}`")))
        }
    };
    if !args.settings.is_empty() {
        cfg.settings = Some(args.settings.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(table: &Table, outcome: RunOutcome, out: &PathBuf) -> ExitCode {
    print!("{}", table.to_tsv());
    log::info!("table written to {}", out.display());
    match outcome {
        RunOutcome::Complete => ExitCode::SUCCESS,
        RunOutcome::Partial => {
            eprintln!("kdcd: some cells errored; see the status column of {}", out.display());
            ExitCode::from(EXIT_PARTIAL)
        }
    }
}

fn fail(err: &Error, code: u8) -> ExitCode {
    eprintln!("kdcd: {err}");
    ExitCode::from(code)
}

fn run_suite_command(
    args: &RunArgs,
    command: &str,
    default_methods: &[&str],
    default_n: usize,
    run: impl FnOnce(&RunConfig) -> Result<(Table, RunOutcome)>,
) -> ExitCode {
    let cfg = match build_run_config(args, command, default_methods, default_n) {
        Ok(cfg) => cfg,
        Err(err) => return fail(&err, EXIT_USAGE),
    };
    match run(&cfg) {
        Ok((table, outcome)) => emit(&table, outcome, &cfg.out),
        Err(err) => fail(&err, EXIT_FAILED),
    }
}

fn run_infer(args: &InferArgs) -> ExitCode {
    let cfg = match build_score_config(&args.score, false, false) {
        Ok(cfg) => cfg,
        Err(err) => return fail(&err, EXIT_USAGE),
    };
    let method = match args.score.method.as_slice() {
        [] => MethodSpec::plain(kernel_deviance::score::Method::KiimHt),
        [name] => match MethodSpec::parse(name) {
            Ok(spec) => spec,
            Err(err) => return fail(&err, EXIT_USAGE),
        },
        _ => {
            return fail(
                &Error::InvalidInput("infer takes a single --method".into()),
                EXIT_USAGE,
            )
        }
    };
    match cmd_infer(&args.file, &method, &cfg) {
        Ok(decision) => {
            println!("method: {}", method.label(&cfg));
            println!("digest: {}", method.configure(&cfg).digest());
            println!("score_xy: {:e}", decision.score_xy);
            println!("score_yx: {:e}", decision.score_yx);
            println!("decision: {}", decision.decision);
            match decision.decision {
                Decision::XtoY => ExitCode::SUCCESS,
                Decision::YtoX => ExitCode::from(1),
                Decision::Undecided => ExitCode::from(EXIT_UNDECIDED),
            }
        }
        Err(err) => fail(&err, EXIT_FAILED),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = err.print();
                    return ExitCode::SUCCESS;
                }
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match &cli.command {
        Command::Synth(args) => {
            run_suite_command(args, "synth", &["kiim-ht"], 100, |cfg| cmd_synth(cfg))
        }
        Command::Synth2d(args) => {
            run_suite_command(args, "synth2d", &["kiim-ht"], 5, |cfg| cmd_synth2d(cfg))
        }
        Command::LambdaSweep(args) => run_suite_command(
            args,
            "lambda-sweep",
            &["kcdc", "kiim", "kiim-ht"],
            100,
            |cfg| cmd_lambda_sweep(cfg),
        ),
        Command::Hypergrid(args) => {
            run_suite_command(args, "hypergrid", &["kiim-ht"], 100, |cfg| cmd_hypergrid(cfg))
        }
        Command::Tcep(args) => {
            let built = build_run_config(
                &args.run,
                "tcep",
                &["kiim-ht", "rw-kiim-ht-n", "rw-kiim-ht-l"],
                100,
            )
            .and_then(|mut cfg| {
                cfg.tcep_dir = Some(args.tcep_dir.clone());
                cfg.downsample_cap = args.downsample_cap;
                cfg.import_decisions = args.import_decisions.clone();
                cfg.weighted = args.weighted;
                cfg.validate()?;
                Ok(cfg)
            });
            let cfg = match built {
                Ok(cfg) => cfg,
                Err(err) => return fail(&err, EXIT_USAGE),
            };
            match cmd_tcep(&cfg) {
                Ok((table, outcome)) => emit(&table, outcome, &cfg.out),
                Err(err) => fail(&err, EXIT_FAILED),
            }
        }
        Command::Infer(args) => run_infer(args),
    }
}
