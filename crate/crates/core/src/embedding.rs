//! Empirical conditional mean embeddings and their importance-reweighted
//! variants.
//!
//! Given gram matrices K_x and K_y over a paired sample, the conditional mean
//! embedding of Y given x_i is estimated as μ_{Y|x_i} = Ψ α_i with
//! α_i = (K_x + λI)^{−1} k_{x_i}, where Ψ stacks the feature maps of the y
//! samples and k_{x_i} is column i of K_x. All scorers consume either the
//! coefficient vectors α_i directly or β_i = K_y α_i.
//!
//! The reweighted variant replaces the plain ridge solve with
//! H R^{1/2} (R^{1/2} H K_x H R^{1/2} + λI)^{−1} R^{1/2} H k_{x_i},
//! where H = I − (1/n)𝟙𝟙ᵀ centers the sample and R = diag(w) carries
//! importance weights w_i = u(x_i)/p̂(x_i) toward a chosen reference law u.
//! Reweighting removes the dependence of the embedding estimate on the cause's
//! marginal, which is a nuisance for causal scoring.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::{median_heuristic, regularized_solve, GramMatrix};

/// Conditional mean embedding coefficients for every conditioning point of a
/// sample.
///
/// Column i of `alphas` is α_i = (K_x + λI)^{−1} k_{x_i}; column i of `coeffs`
/// is β_i = K_y α_i. The identity `coeffs = K_y · alphas` holds for every set
/// produced by this module.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub alphas: DMatrix<f64>,
    pub coeffs: DMatrix<f64>,
}

impl EmbeddingSet {
    /// Number of conditioning points (and of coefficient entries).
    pub fn n(&self) -> usize {
        self.alphas.ncols()
    }
}

/// Reference law the importance weights pull the cause sample toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceLaw {
    Gaussian,
    Laplace,
}

impl ReferenceLaw {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceLaw::Gaussian => "gaussian",
            ReferenceLaw::Laplace => "laplace",
        }
    }
}

/// Bandwidth rule for the kernel density estimate of the cause's marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KdeBandwidth {
    /// median pairwise distance · n^{−1/5}; the rule-of-thumb default.
    MedianHeuristic,
    Fixed(f64),
}

/// How importance weights are computed: the reference law u, the KDE
/// bandwidth for p̂, and the clip range that guards against density-tail
/// blow-ups.
#[derive(Debug, Clone, PartialEq)]
pub struct ReweightConfig {
    pub reference: ReferenceLaw,
    pub kde_bandwidth: KdeBandwidth,
    /// (w_min, w_max) with 0 < w_min ≤ w_max.
    pub weight_clip: (f64, f64),
}

impl ReweightConfig {
    pub fn new(reference: ReferenceLaw) -> Self {
        ReweightConfig {
            reference,
            kde_bandwidth: KdeBandwidth::MedianHeuristic,
            weight_clip: (1e-3, 1e3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.weight_clip;
        if !(lo > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "weight_clip must satisfy 0 < min <= max, got ({lo}, {hi})"
            )));
        }
        if let KdeBandwidth::Fixed(h) = self.kde_bandwidth {
            if !(h > 0.0) || !h.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "kde bandwidth must be positive and finite, got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Subtract from every column its mean: H·M with H = I − (1/n)𝟙𝟙ᵀ.
pub(crate) fn center_cols(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..out.ncols() {
        let mean = out.column(j).mean();
        for i in 0..out.nrows() {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// Subtract from every row its mean: M·H.
pub(crate) fn center_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        let mean = out.row(i).mean();
        for j in 0..out.ncols() {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// diag(s)·M — multiply row i by s[i].
pub(crate) fn scale_rows(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        for j in 0..out.ncols() {
            out[(i, j)] *= s[i];
        }
    }
    out
}

/// M·diag(s) — multiply column j by s[j].
pub(crate) fn scale_cols(m: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for j in 0..out.ncols() {
        for i in 0..out.nrows() {
            out[(i, j)] *= s[j];
        }
    }
    out
}

/// Conditional mean embedding coefficients at every training input.
///
/// Since the conditioning points are the training inputs themselves,
/// `alphas = (K_x + λI)^{−1} K_x` and `coeffs = K_y · alphas` in one solve.
pub fn conditional_embeddings(
    k_x: &GramMatrix,
    k_y: &GramMatrix,
    lambda: f64,
) -> Result<EmbeddingSet> {
    if k_x.n != k_y.n {
        return Err(Error::InvalidInput(format!(
            "conditional_embeddings: K_x is {}x{0} but K_y is {}x{1}",
            k_x.n, k_y.n
        )));
    }
    let alphas = regularized_solve(k_x, lambda, &k_x.entries, "K_x")?;
    let coeffs = &k_y.entries * &alphas;
    Ok(EmbeddingSet { alphas, coeffs })
}

/// ‖μ_{Y|x_i}‖² = α_iᵀ K_y α_i, clamped below at zero (roundoff can push the
/// quadratic form a few ulps negative).
pub fn embedding_norm_sq(set: &EmbeddingSet, k_y: &GramMatrix, i: usize) -> Result<f64> {
    let n = set.n();
    if i >= n {
        return Err(Error::InvalidInput(format!(
            "embedding_norm_sq: index {i} out of range for {n} embeddings"
        )));
    }
    if k_y.n != n {
        return Err(Error::InvalidInput(format!(
            "embedding_norm_sq: K_y is {}x{0} but the set has {n} embeddings",
            k_y.n
        )));
    }
    let alpha = set.alphas.column(i);
    let v = (alpha.transpose() * &k_y.entries * alpha)[(0, 0)];
    Ok(v.max(0.0))
}

fn gaussian_logpdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

fn laplace_logpdf(x: f64, mu: f64, b: f64) -> f64 {
    -(x - mu).abs() / b - (2.0 * b).ln()
}

/// Importance weights w_i = u(x_i)/p̂(x_i), clipped to the config's range.
///
/// p̂ is a product-form Gaussian kernel density estimate over the sample with
/// one shared bandwidth; u is the reference law moment-matched to the sample
/// mean and variance per dimension (dimensions treated as independent, Laplace
/// scale b = std/√2 so the variance matches). Points are the rows of `x`.
pub fn importance_weights(x: &DMatrix<f64>, cfg: &ReweightConfig) -> Result<DVector<f64>> {
    cfg.validate()?;
    let n = x.nrows();
    let d = x.ncols();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "importance_weights needs at least 2 samples, got {n}"
        )));
    }

    // Moment-match the reference per dimension; a constant dimension has no
    // matchable spread and makes u degenerate.
    let mut mu = vec![0.0; d];
    let mut sd = vec![0.0; d];
    for j in 0..d {
        let colv = x.column(j);
        let m = colv.mean();
        let var = colv.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n as f64 - 1.0);
        if !(var > 0.0) {
            return Err(Error::Degenerate(format!(
                "importance_weights: dimension {j} has zero variance"
            )));
        }
        mu[j] = m;
        sd[j] = var.sqrt();
    }

    let h = match cfg.kde_bandwidth {
        KdeBandwidth::Fixed(h) => h,
        KdeBandwidth::MedianHeuristic => median_heuristic(x)? * (n as f64).powf(-0.2),
    };

    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let (lo, hi) = cfg.weight_clip;
    let mut w = DVector::zeros(n);
    for i in 0..n {
        // log p̂(x_i): log-sum-exp over the kernel contributions of every
        // sample point, so far-out tails underflow gracefully.
        let logs: Vec<f64> = (0..n)
            .map(|j| {
                (0..d)
                    .map(|k| gaussian_logpdf(rows[i][k], rows[j][k], h))
                    .sum::<f64>()
            })
            .collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_p =
            max + logs.iter().map(|l| (l - max).exp()).sum::<f64>().ln() - (n as f64).ln();

        let log_u: f64 = (0..d)
            .map(|k| match cfg.reference {
                ReferenceLaw::Gaussian => gaussian_logpdf(rows[i][k], mu[k], sd[k]),
                ReferenceLaw::Laplace => {
                    laplace_logpdf(rows[i][k], mu[k], sd[k] / f64::sqrt(2.0))
                }
            })
            .sum();

        w[i] = (log_u - log_p).exp().clamp(lo, hi);
    }
    Ok(w)
}

/// Conditional mean embeddings under sample centering and importance
/// reweighting:
/// alphas column i = H R^{1/2} (R^{1/2} H K_x H R^{1/2} + λI)^{−1} R^{1/2} H k_{x_i}.
///
/// H and R are never materialized; centering and diagonal scaling are applied
/// as row/column passes.
pub fn reweighted_conditional_embeddings(
    k_x: &GramMatrix,
    k_y: &GramMatrix,
    lambda: f64,
    weights: &DVector<f64>,
) -> Result<EmbeddingSet> {
    let n = k_x.n;
    if k_y.n != n {
        return Err(Error::InvalidInput(format!(
            "reweighted_conditional_embeddings: K_x is {n}x{n} but K_y is {}x{0}",
            k_y.n
        )));
    }
    if weights.len() != n {
        return Err(Error::InvalidInput(format!(
            "reweighted_conditional_embeddings: {} weights for {n} samples",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidInput(
            "reweighted_conditional_embeddings: weights must be positive and finite".into(),
        ));
    }
    let s = weights.map(f64::sqrt);

    // R^{1/2} H K_x (right-hand side) and R^{1/2} H K_x H R^{1/2} (system).
    let rhk = scale_rows(&center_cols(&k_x.entries), &s);
    let mut a = scale_cols(&center_rows(&rhk), &s);
    // The product of passes is symmetric in exact arithmetic; restore it
    // bit-for-bit so the Cholesky path sees a symmetric matrix.
    a = 0.5 * (&a + a.transpose());

    let system = GramMatrix { entries: a, n };
    let g = regularized_solve(&system, lambda, &rhk, "R^{1/2} H K_x H R^{1/2}")?;
    let alphas = center_cols(&scale_rows(&g, &s));
    let coeffs = &k_y.entries * &alphas;
    Ok(EmbeddingSet { alphas, coeffs })
}

/// Mean embedding of a scalar sample under the explicit quadratic feature map
/// y ↦ (1, y, y²): returns [1, mean(y), mean(y²)].
///
/// This is the closed-form companion used to sanity-check embedding behavior:
/// shifting the sample by b multiplies the result by the lower-triangular
/// matrix [[1,0,0],[b,1,0],[b²,2b,1]].
pub fn quadratic_featuremap_embedding(samples: &[f64]) -> Result<[f64; 3]> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "quadratic_featuremap_embedding: empty sample".into(),
        ));
    }
    let n = samples.len() as f64;
    let m1 = samples.iter().sum::<f64>() / n;
    let m2 = samples.iter().map(|v| v * v).sum::<f64>() / n;
    Ok([1.0, m1, m2])
}
