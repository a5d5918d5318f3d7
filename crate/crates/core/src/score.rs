//! The four direction scores. Each maps an ordered (cause-candidate,
//! effect-candidate) sample pair to a nonnegative real where *lower* means
//! "more plausibly causal"; comparing the two orderings of a pair yields the
//! direction call (see [`crate::infer`]).
//!
//! | method    | score                                                          |
//! |-----------|----------------------------------------------------------------|
//! | `KiimHt`  | minimum over training of the regularized pairwise deviance of  |
//! |           | the *heterogeneously projected* conditional embeddings         |
//! | `Kcdc`    | variance of the conditional-embedding norms ‖μ_{Y|x_i}‖        |
//! | `Kiim`    | deviance of the best fixed rank-constrained projection         |
//! |           | (an eigenvalue sum)                                            |
//! | `Igci`    | mean log-slope after reference normalization (kernel-free)     |
//!
//! All kernel scorers build product-kernel gram matrices with the median
//! pairwise distance of each variable as its RBF length-scale, freshly per
//! direction. Setting `reweight` switches `Kiim`/`KiimHt` to importance-
//! reweighted embeddings (the Rw- variants); `Kcdc` and `Igci` ignore it.

use nalgebra::DMatrix;

use crate::embedding::{
    center_rows, conditional_embeddings, importance_weights, reweighted_conditional_embeddings,
    EmbeddingSet, ReweightConfig,
};
use crate::error::{Error, Result};
use crate::kernel::{gram, median_heuristic, GramMatrix, KernelConfig};
use crate::projection::{
    adam_step, init_network, loss_grad_parts, loss_parts, AdamState, LossConfig, ProjectionNetwork,
};

/// Direction-scoring method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    KiimHt,
    Kcdc,
    Kiim,
    Igci,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::KiimHt => "kiim-ht",
            Method::Kcdc => "kcdc",
            Method::Kiim => "kiim",
            Method::Igci => "igci",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Reference measure for the IGCI normalization step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgciReference {
    /// Affinely map each dimension onto [0, 1].
    Uniform,
    /// Standardize each dimension to zero mean, unit variance.
    Gaussian,
}

impl IgciReference {
    pub fn name(self) -> &'static str {
        match self {
            IgciReference::Uniform => "uniform",
            IgciReference::Gaussian => "gaussian",
        }
    }
}

/// Everything a scorer needs besides the data.
///
/// `kernel.length_scale` is a placeholder here: scorers re-derive it per
/// variable and per direction with the median heuristic. `kernel.reg` is the
/// ridge λ. `rank`/`hidden` shape the projection network; `kiim_rank` is the
/// (separate) projection rank of the fixed-projection score, clamped to n.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreConfig {
    pub kernel: KernelConfig,
    pub loss: LossConfig,
    /// Importance reweighting toward a reference law; applies to `Kiim` and
    /// `KiimHt` only.
    pub reweight: Option<ReweightConfig>,
    /// Projection rank of the fixed-projection (eigenvalue) score; values
    /// above n act as n (full trace).
    pub kiim_rank: usize,
    pub igci_reference: IgciReference,
    pub seed: u64,
    /// Hidden width of the projection network.
    pub hidden: usize,
    /// Per-sample projection rank r of the network output.
    pub rank: usize,
    /// Use n·λ instead of λ in the norm-variance score's ridge solve (the
    /// convention of the original formulation of that score).
    pub kcdc_n_lambda: bool,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            kernel: KernelConfig::default(),
            loss: LossConfig::default(),
            reweight: None,
            kiim_rank: 100,
            igci_reference: IgciReference::Uniform,
            seed: 0,
            hidden: 20,
            rank: 100,
            kcdc_n_lambda: false,
        }
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        self.loss.validate()?;
        if let Some(rw) = &self.reweight {
            rw.validate()?;
        }
        if self.kiim_rank == 0 {
            return Err(Error::InvalidInput("kiim_rank must be at least 1".into()));
        }
        if self.hidden == 0 || self.rank == 0 {
            return Err(Error::InvalidInput(
                "network hidden width and rank must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Canonical key=value rendering of every field, in fixed order.
    /// This string — not the struct layout — defines config identity.
    pub fn canonical(&self) -> String {
        let rw = match &self.reweight {
            None => "none".to_string(),
            Some(c) => {
                let bw = match c.kde_bandwidth {
                    crate::embedding::KdeBandwidth::MedianHeuristic => "median".to_string(),
                    crate::embedding::KdeBandwidth::Fixed(h) => format!("{h:e}"),
                };
                format!(
                    "{}:bw={bw}:clip={:e},{:e}",
                    c.reference.name(),
                    c.weight_clip.0,
                    c.weight_clip.1
                )
            }
        };
        format!(
            "kernel={};ell={:e};amp={:e};lambda={:e};lambda_reg={:e};iters={};norm_pairs={};\
             reweight={rw};kiim_rank={};igci_ref={};seed={};hidden={};rank={};kcdc_n_lambda={}",
            self.kernel.family.name(),
            self.kernel.length_scale,
            self.kernel.amplitude,
            self.kernel.reg,
            self.loss.lambda_reg,
            self.loss.iterations,
            self.loss.normalize_pairs,
            self.kiim_rank,
            self.igci_reference.name(),
            self.seed,
            self.hidden,
            self.rank,
            self.kcdc_n_lambda,
        )
    }

    /// Stable 64-bit FNV-1a digest of the canonical config rendering; equal
    /// configs produce equal digests across runs and platforms.
    pub fn digest(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical().as_bytes()))
    }
}

/// Score value plus optimization diagnostics.
///
/// For the trained score, `trace` holds the loss at the initial parameters
/// and after each optimizer step (length iterations + 1), `value` is its
/// minimum, `best_iteration` the index attaining it, and `unregularized` the
/// bare pairwise term at that iterate. Closed-form scorers leave the trace
/// empty and `unregularized` unset.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreResult {
    pub value: f64,
    pub iterations_run: usize,
    pub best_iteration: usize,
    pub trace: Vec<f64>,
    pub unregularized: Option<f64>,
}

impl ScoreResult {
    fn closed_form(value: f64) -> Self {
        ScoreResult {
            value,
            iterations_run: 0,
            best_iteration: 0,
            trace: Vec::new(),
            unregularized: None,
        }
    }
}

/// Shared sample validation: paired rows, enough of them, finite entries.
fn validate_pair(cause: &DMatrix<f64>, effect: &DMatrix<f64>) -> Result<usize> {
    let n = cause.nrows();
    if effect.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "sample counts differ: cause has {n} rows, effect has {}",
            effect.nrows()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "scoring needs at least 2 samples, got {n}"
        )));
    }
    if cause.ncols() == 0 || effect.ncols() == 0 {
        return Err(Error::InvalidInput("samples must have at least 1 dimension".into()));
    }
    if !cause.iter().all(|v| v.is_finite()) || !effect.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("samples contain non-finite values".into()));
    }
    Ok(n)
}

/// Product-kernel gram matrices with per-variable median-heuristic
/// length-scales. Degenerate (constant) variables error here, which is where
/// every kernel scorer inherits its constant-input rejection.
fn build_grams(
    cause: &DMatrix<f64>,
    effect: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<(GramMatrix, GramMatrix)> {
    let mut kc = cfg.kernel.clone();
    kc.length_scale = median_heuristic(cause)?;
    let k_x = gram(cause, &kc)?;
    kc.length_scale = median_heuristic(effect)?;
    let k_y = gram(effect, &kc)?;
    Ok((k_x, k_y))
}

/// Plain or reweighted embeddings per the config, with ridge λ (possibly
/// rescaled by the caller).
fn embeddings_for(
    cause: &DMatrix<f64>,
    k_x: &GramMatrix,
    k_y: &GramMatrix,
    lambda: f64,
    reweight: &Option<ReweightConfig>,
) -> Result<EmbeddingSet> {
    match reweight {
        None => conditional_embeddings(k_x, k_y, lambda),
        Some(rw) => {
            let w = importance_weights(cause, rw)?;
            reweighted_conditional_embeddings(k_x, k_y, lambda, &w)
        }
    }
}

// ---------------------------------------------------------------------------
// Trained heterogeneous-projection score
// ---------------------------------------------------------------------------

/// Run the full training loop on a caller-supplied network and return the
/// best-so-far tracking per the scoring algorithm: the trace records the loss
/// at the initial parameters and after every step, and the score is the
/// lowest value encountered.
pub fn train_projection(
    mut net: ProjectionNetwork,
    embeddings: &EmbeddingSet,
    loss_cfg: &LossConfig,
    x_samples: &DMatrix<f64>,
) -> Result<ScoreResult> {
    let iters = loss_cfg.iterations;
    let mut adam = AdamState::new(&net);
    let mut trace = Vec::with_capacity(iters + 1);
    let mut best = f64::INFINITY;
    let mut best_iteration = 0usize;
    let mut unregularized = None;

    for it in 0..iters {
        let (value, pairwise, grad) = loss_grad_parts(&net, embeddings, loss_cfg, x_samples)?;
        trace.push(value);
        if value < best {
            best = value;
            best_iteration = it;
            unregularized = Some(pairwise);
        }
        adam_step(&mut net, &grad, &mut adam);
    }
    let (final_value, final_pairwise) = loss_parts(&net, embeddings, loss_cfg, x_samples)?;
    trace.push(final_value);
    if final_value < best {
        best = final_value;
        best_iteration = iters;
        unregularized = Some(final_pairwise);
    }

    Ok(ScoreResult {
        value: best,
        iterations_run: iters,
        best_iteration,
        trace,
        unregularized,
    })
}

/// Heterogeneous-projection score on precomputed embeddings: initialize the
/// network from `cfg.seed`, train for `cfg.loss.iterations` steps, return the
/// minimum loss observed.
pub fn kiim_ht_score_with_embeddings(
    embeddings: &EmbeddingSet,
    x_samples: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    cfg.validate()?;
    let n = embeddings.n();
    if x_samples.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "kiim_ht: {} inputs for {n} embeddings",
            x_samples.nrows()
        )));
    }
    let net = init_network(x_samples.ncols(), cfg.hidden, cfg.rank, n, cfg.seed);
    train_projection(net, embeddings, &cfg.loss, x_samples)
}

/// Heterogeneous-projection score from raw samples. Deterministic in
/// (inputs, cfg); honors `cfg.reweight`.
pub fn kiim_ht_score(
    cause: &DMatrix<f64>,
    effect: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    cfg.validate()?;
    validate_pair(cause, effect)?;
    let (k_x, k_y) = build_grams(cause, effect, cfg)?;
    let set = embeddings_for(cause, &k_x, &k_y, cfg.kernel.reg, &cfg.reweight)?;
    kiim_ht_score_with_embeddings(&set, cause, cfg)
}

// ---------------------------------------------------------------------------
// Norm-variance score
// ---------------------------------------------------------------------------

/// Norm-variance score on precomputed gram matrices:
/// (1/n)Σᵢ(‖μ_{Y|x_i}‖ − m)² with m the mean norm.
pub fn kcdc_score_from_grams(
    k_x: &GramMatrix,
    k_y: &GramMatrix,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    cfg.validate()?;
    let n = k_x.n;
    let lambda = if cfg.kcdc_n_lambda {
        n as f64 * cfg.kernel.reg
    } else {
        cfg.kernel.reg
    };
    let set = conditional_embeddings(k_x, k_y, lambda)?;
    let norms: Vec<f64> = (0..n)
        .map(|i| crate::embedding::embedding_norm_sq(&set, k_y, i).map(f64::sqrt))
        .collect::<Result<_>>()?;
    let mean = norms.iter().sum::<f64>() / n as f64;
    let value = norms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    Ok(ScoreResult::closed_form(value))
}

/// Norm-variance score from raw samples. Reweighting does not apply to this
/// method and is ignored.
pub fn kcdc_score(
    cause: &DMatrix<f64>,
    effect: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    cfg.validate()?;
    validate_pair(cause, effect)?;
    let (k_x, k_y) = build_grams(cause, effect, cfg)?;
    kcdc_score_from_grams(&k_x, &k_y, cfg)
}

// ---------------------------------------------------------------------------
// Fixed-projection (eigenvalue) score
// ---------------------------------------------------------------------------

/// Cholesky of K_y with an escalating jitter ladder: gram matrices of nearly
/// coincident samples are PSD but rank-deficient, and a hair of diagonal mass
/// restores factorizability without visibly moving the spectrum.
fn chol_with_jitter(k_y: &GramMatrix) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let n = k_y.n;
    let mean_diag = k_y.entries.diagonal().mean();
    for jitter in [0.0, 1e-12, 1e-10, 1e-8] {
        let mut m = k_y.entries.clone();
        if jitter > 0.0 {
            let add = jitter * mean_diag;
            for i in 0..n {
                m[(i, i)] += add;
            }
        }
        if let Some(chol) = m.cholesky() {
            return Ok(chol);
        }
    }
    Err(Error::Numeric(
        "cholesky factorization of K_y failed even with jitter".into(),
    ))
}

/// Fixed-projection score on a precomputed embedding set: the minimum of the
/// projected deviance over rank-constrained projections with K_y-orthonormal
/// directions, which is the sum of the `kiim_rank` smallest eigenvalues of
/// the whitened coefficient scatter.
pub fn kiim_score_from(
    set: &EmbeddingSet,
    k_y: &GramMatrix,
    kiim_rank: usize,
) -> Result<ScoreResult> {
    let n = set.n();
    if k_y.n != n {
        return Err(Error::InvalidInput(format!(
            "kiim: K_y is {}x{0} but the embedding set has {n} columns",
            k_y.n
        )));
    }
    if kiim_rank == 0 {
        return Err(Error::InvalidInput("kiim_rank must be at least 1".into()));
    }
    let rank = kiim_rank.min(n);

    // The generalized problem (K_y C K_y)v = μ K_y v, C the scatter of the
    // α's, whitens to the ordinary spectrum of (L⁻¹Bc)(L⁻¹Bc)ᵀ with
    // K_y = LLᵀ and Bc the column-centered coefficient matrix K_y·(α − ᾱ).
    let chol = chol_with_jitter(k_y)?;
    let bc = center_rows(&set.coeffs);
    let m = chol.l_dirty().solve_lower_triangular(&bc).ok_or_else(|| {
        Error::Numeric("triangular solve against the K_y factor failed".into())
    })?;
    let s = &m * m.transpose();
    let eigen = s.symmetric_eigen();
    let mut vals: Vec<f64> = eigen.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    vals.sort_by(f64::total_cmp);
    let value = vals[..rank].iter().sum();
    Ok(ScoreResult::closed_form(value))
}

/// Fixed-projection score from raw samples. Honors `cfg.reweight`.
pub fn kiim_score(
    cause: &DMatrix<f64>,
    effect: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    cfg.validate()?;
    validate_pair(cause, effect)?;
    let (k_x, k_y) = build_grams(cause, effect, cfg)?;
    let set = embeddings_for(cause, &k_x, &k_y, cfg.kernel.reg, &cfg.reweight)?;
    kiim_score_from(&set, &k_y, cfg.kiim_rank)
}

// ---------------------------------------------------------------------------
// Slope-based score
// ---------------------------------------------------------------------------

fn igci_normalize(values: &[f64], reference: IgciReference, what: &str) -> Result<Vec<f64>> {
    match reference {
        IgciReference::Uniform => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max <= min {
                return Err(Error::Degenerate(format!(
                    "igci: {what} is constant, cannot normalize to [0, 1]"
                )));
            }
            Ok(values.iter().map(|v| (v - min) / (max - min)).collect())
        }
        IgciReference::Gaussian => {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            if !(var > 0.0) {
                return Err(Error::Degenerate(format!(
                    "igci: {what} is constant, cannot standardize"
                )));
            }
            let sd = var.sqrt();
            Ok(values.iter().map(|v| (v - mean) / sd).collect())
        }
    }
}

/// Slope-based score for one matched (cause dim, effect dim) column pair.
fn igci_dimension(cause: &[f64], effect: &[f64], reference: IgciReference) -> Result<f64> {
    let n = cause.len();
    let c = igci_normalize(cause, reference, "cause dimension")?;
    let e = igci_normalize(effect, reference, "effect dimension")?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]));

    let mut sum = 0.0;
    let mut any = false;
    for w in order.windows(2) {
        let dc = c[w[1]] - c[w[0]];
        let de = e[w[1]] - e[w[0]];
        if dc != 0.0 && de != 0.0 {
            sum += (de.abs() / dc.abs()).ln();
            any = true;
        }
    }
    if !any {
        return Err(Error::Degenerate(
            "igci: no consecutive pair with distinct cause and effect values".into(),
        ));
    }
    Ok(sum / (n as f64 - 1.0))
}

/// Slope-based score: normalize each dimension to the reference measure,
/// sort by cause, and average log|Δeffect/Δcause| over consecutive pairs.
/// Kernel and reweighting configuration are irrelevant to this method and
/// ignored; vector pairs must have matching dimension counts (the score is
/// the per-dimension sum).
pub fn igci_score(
    cause: &DMatrix<f64>,
    effect: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    cfg.validate()?;
    validate_pair(cause, effect)?;
    if cause.ncols() != effect.ncols() {
        return Err(Error::InvalidInput(format!(
            "igci: dimension mismatch ({} cause vs {} effect); the slope score \
             needs matched dimensions",
            cause.ncols(),
            effect.ncols()
        )));
    }
    let mut value = 0.0;
    for j in 0..cause.ncols() {
        let c: Vec<f64> = cause.column(j).iter().copied().collect();
        let e: Vec<f64> = effect.column(j).iter().copied().collect();
        value += igci_dimension(&c, &e, cfg.igci_reference)?;
    }
    Ok(ScoreResult::closed_form(value))
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

/// Uniform entry point over all methods.
pub fn score(
    method: Method,
    cause: &DMatrix<f64>,
    effect: &DMatrix<f64>,
    cfg: &ScoreConfig,
) -> Result<ScoreResult> {
    match method {
        Method::KiimHt => kiim_ht_score(cause, effect, cfg),
        Method::Kcdc => kcdc_score(cause, effect, cfg),
        Method::Kiim => kiim_score(cause, effect, cfg),
        Method::Igci => igci_score(cause, effect, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn identity_gram(n: usize) -> GramMatrix {
        GramMatrix {
            entries: DMatrix::identity(n, n),
            n,
        }
    }

    fn col(vals: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(vals.len(), 1, vals)
    }

    #[test]
    fn digest_is_stable_and_field_sensitive() {
        let a = ScoreConfig::default();
        let mut b = ScoreConfig::default();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
        let mut c = ScoreConfig::default();
        c.kcdc_n_lambda = true;
        assert_ne!(a.digest(), c.digest());
    }

    #[test]
    fn kcdc_zero_for_symmetric_identity_instance() {
        // K_x = K_y = I, λ = 1: both norms are √0.25, variance 0.
        let mut cfg = ScoreConfig::default();
        cfg.kernel.reg = 1.0;
        let r = kcdc_score_from_grams(&identity_gram(2), &identity_gram(2), &cfg).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn kcdc_zero_when_effect_gram_is_constant() {
        // All effect samples identical → K_y all ones → every norm equals 1.
        let pts = col(&[0.0, 1.0, -0.5, 2.0]);
        let k_x = gram(&pts, &KernelConfig::product(1.0)).unwrap();
        let k_y = GramMatrix {
            entries: DMatrix::from_element(4, 4, 1.0),
            n: 4,
        };
        let mut cfg = ScoreConfig::default();
        cfg.kernel.reg = 0.0;
        let r = kcdc_score_from_grams(&k_x, &k_y, &cfg).unwrap();
        assert!(r.value.abs() < 1e-18, "{}", r.value);
    }

    #[test]
    fn kcdc_n_lambda_rescales_the_ridge() {
        let x = col(&[0.0, 0.6, -1.0, 1.7, 0.3]);
        let y = col(&[1.0, -0.2, 0.8, 0.1, -0.9]);
        let mut plain = ScoreConfig::default();
        plain.kernel.reg = 5e-3; // n·λ with n = 5 and λ = 1e-3
        let mut scaled = ScoreConfig::default();
        scaled.kernel.reg = 1e-3;
        scaled.kcdc_n_lambda = true;
        let a = kcdc_score(&x, &y, &plain).unwrap();
        let b = kcdc_score(&x, &y, &scaled).unwrap();
        assert!((a.value - b.value).abs() < 1e-15, "{} vs {}", a.value, b.value);
    }

    #[test]
    fn kiim_zero_when_alphas_are_constant() {
        let alpha = DVector::from_column_slice(&[0.3, -0.2, 0.4]);
        let alphas = DMatrix::from_columns(&[alpha.clone(), alpha.clone(), alpha]);
        let k_y = gram(&col(&[0.0, 0.8, -0.6]), &KernelConfig::product(1.0)).unwrap();
        let coeffs = &k_y.entries * &alphas;
        let set = EmbeddingSet { alphas, coeffs };
        let r = kiim_score_from(&set, &k_y, 2).unwrap();
        assert!(r.value.abs() < 1e-20, "{}", r.value);
    }

    #[test]
    fn kiim_full_rank_equals_whitened_scatter_trace() {
        let xs = col(&[0.0, 0.5, 1.3, -0.8]);
        let ys = col(&[0.2, -0.7, 1.0, 0.4]);
        let cfg = KernelConfig::product(1.0);
        let k_x = gram(&xs, &cfg).unwrap();
        let k_y = gram(&ys, &cfg).unwrap();
        let set = conditional_embeddings(&k_x, &k_y, 1e-3).unwrap();
        let r = kiim_score_from(&set, &k_y, 4).unwrap();

        // Direct trace: tr(L⁻¹ Bc Bcᵀ L⁻ᵀ) = ‖L⁻¹Bc‖²_F.
        let l = k_y.entries.clone().cholesky().unwrap();
        let bc = center_rows(&set.coeffs);
        let m = l.l().solve_lower_triangular(&bc).unwrap();
        let expected = m.norm_squared();
        assert!(
            (r.value - expected).abs() < 1e-10 * expected.max(1.0),
            "{} vs {expected}",
            r.value
        );
        // A rank above n behaves as rank n.
        let clamped = kiim_score_from(&set, &k_y, 10).unwrap();
        assert_eq!(clamped.value, r.value);
    }

    #[test]
    fn igci_identity_and_affine_maps_score_zero() {
        let x = col(&[0.1, 0.7, 0.3, 0.9, 0.5]);
        let cfg = ScoreConfig::default();
        let r = igci_score(&x, &x, &cfg).unwrap();
        assert!(r.value.abs() < 1e-12, "{}", r.value);
        let r = igci_score(&x, &(2.0 * &x), &cfg).unwrap();
        assert!(r.value.abs() < 1e-12, "{}", r.value);
        // Both directions of the identity map agree (undecidable pair).
        let fwd = igci_score(&x, &x, &cfg).unwrap();
        let rev = igci_score(&x, &x, &cfg).unwrap();
        assert_eq!(fwd.value, rev.value);
    }

    #[test]
    fn igci_three_point_hand_value() {
        let c = col(&[0.0, 1.0, 2.0]);
        let e = col(&[0.0, 1.0, 4.0]);
        let cfg = ScoreConfig::default();
        let r = igci_score(&c, &e, &cfg).unwrap();
        // Normalized slopes 0.5 and 1.5 → (ln 0.5 + ln 1.5)/2 = ln(0.75)/2.
        let expected = 0.75f64.ln() / 2.0;
        assert!((r.value - expected).abs() < 1e-12, "{} vs {expected}", r.value);
    }

    #[test]
    fn igci_rejects_degenerate_and_mismatched_inputs() {
        let cfg = ScoreConfig::default();
        let c = col(&[1.0, 1.0, 1.0]);
        let e = col(&[0.0, 1.0, 2.0]);
        assert!(matches!(igci_score(&c, &e, &cfg), Err(Error::Degenerate(_))));
        assert!(matches!(igci_score(&e, &c, &cfg), Err(Error::Degenerate(_))));
        let gauss = ScoreConfig {
            igci_reference: IgciReference::Gaussian,
            ..ScoreConfig::default()
        };
        assert!(matches!(igci_score(&c, &e, &gauss), Err(Error::Degenerate(_))));
        let e2 = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(matches!(igci_score(&e, &e2, &cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn every_method_rejects_a_constant_variable() {
        let constant = col(&[2.0; 6]);
        let varying = col(&[0.0, 0.4, -0.3, 1.2, 0.8, -1.0]);
        let cfg = ScoreConfig::default();
        for method in [Method::KiimHt, Method::Kcdc, Method::Kiim, Method::Igci] {
            for (c, e) in [(&constant, &varying), (&varying, &constant)] {
                let res = score(method, c, e, &cfg);
                assert!(
                    matches!(res, Err(Error::Degenerate(_))),
                    "{method} accepted a constant variable: {res:?}"
                );
            }
        }
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let x = col(&[0.0, 0.6, -1.0, 1.7, 0.3]);
        let y = col(&[1.0, -0.2, 0.8, 0.1, -0.9]);
        let cfg = ScoreConfig::default();
        assert_eq!(
            score(Method::Kcdc, &x, &y, &cfg).unwrap(),
            kcdc_score(&x, &y, &cfg).unwrap()
        );
        assert_eq!(
            score(Method::Igci, &x, &y, &cfg).unwrap(),
            igci_score(&x, &y, &cfg).unwrap()
        );
    }

    #[test]
    fn trained_score_is_deterministic_and_minimum_of_trace() {
        let x = col(&[0.0, 0.5, -0.8, 1.2, 2.0, -1.5]);
        let y = col(&[0.3, 0.9, -0.4, 1.0, 1.8, -1.2]);
        let mut cfg = ScoreConfig::default();
        cfg.loss.iterations = 5;
        cfg.rank = 3;
        cfg.hidden = 4;
        let a = kiim_ht_score(&x, &y, &cfg).unwrap();
        let b = kiim_ht_score(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), 6);
        assert_eq!(a.iterations_run, 5);
        let min = a.trace.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(a.value, min);
        assert_eq!(a.trace[a.best_iteration], a.value);
        assert!(a.value > 0.0);
        assert!(a.unregularized.unwrap() >= 0.0);
        assert!(a.unregularized.unwrap() <= a.value);
    }

    #[test]
    fn identical_coefficients_train_on_the_barrier_alone() {
        // A network that starts constant in x stays constant (zero gradient
        // at the quadratic bottom of the pairwise term), so every trace entry
        // is the barrier value: strictly positive, pairwise exactly zero.
        let beta = DVector::from_column_slice(&[0.4, -0.1]);
        let coeffs = DMatrix::from_columns(&[beta.clone(), beta]);
        let set = EmbeddingSet {
            alphas: coeffs.clone(),
            coeffs,
        };
        let x = col(&[0.0, 1.0]);
        let mut net = init_network(1, 3, 2, 2, 7);
        net.w1.fill(0.0);
        let cfg = LossConfig {
            iterations: 4,
            ..LossConfig::default()
        };
        let r = train_projection(net, &set, &cfg, &x).unwrap();
        assert_eq!(r.trace.len(), 5);
        assert!(r.value > 0.0);
        assert_eq!(r.unregularized, Some(0.0));
        // The barrier shrinks as ‖W‖ grows, so training improves the score.
        assert!(r.trace[4] <= r.trace[0]);
    }

    #[test]
    fn reweighting_changes_kernel_scores_but_not_slope_scores() {
        let x = col(&[0.0, 0.6, -1.0, 1.7, 0.3, -0.4, 1.1, 0.9]);
        let y = col(&[1.0, -0.2, 0.8, 0.1, -0.9, 0.5, 0.2, -0.3]);
        let plain = ScoreConfig::default();
        let rw = ScoreConfig {
            reweight: Some(ReweightConfig::new(crate::embedding::ReferenceLaw::Gaussian)),
            ..ScoreConfig::default()
        };
        let a = kiim_score(&x, &y, &plain).unwrap();
        let b = kiim_score(&x, &y, &rw).unwrap();
        assert_ne!(a.value, b.value);
        // The slope score has no kernel machinery to reweight.
        assert_eq!(
            igci_score(&x, &y, &plain).unwrap().value,
            igci_score(&x, &y, &rw).unwrap().value
        );
        // The norm-variance score ignores the reweight config by contract.
        assert_eq!(
            kcdc_score(&x, &y, &plain).unwrap().value,
            kcdc_score(&x, &y, &rw).unwrap().value
        );
    }
}
