//! The heterogeneous projection map x ↦ W(x), its regularized pairwise
//! deviance loss, the exact gradient, and the Adam optimizer that trains it.
//!
//! W(x) is a one-hidden-layer feedforward network: a ReLU layer of `h` units
//! followed by a linear layer of `r·n` outputs, reshaped row-major into an
//! n×r matrix. Training minimizes
//!
//! ```text
//! Σ_{i>j} ‖W(x_i)ᵀβ_i − W(x_j)ᵀβ_j‖²  +  (λ_reg/n) Σ_i 1/‖W(x_i)‖_F²
//! ```
//!
//! where β_i is the i-th conditional-embedding coefficient vector. The first
//! term asks one shared map to make every projected conditional embedding
//! look alike; the second keeps the map away from the trivial W ≡ 0 solution.
//! The minimized value is the directional score: it is small when a single
//! input-dependent projection can iron out the conditionals' variation, which
//! is the signature of the causal direction.
//!
//! The gradient is reverse-mode accumulation through the whole expression,
//! computed batched over the sample (three large matrix products per
//! evaluation; see `gemm`). Everything is deterministic: full-batch gradients,
//! seeded initialization, no dropout.

use nalgebra::{DMatrix, DVector};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::gemm::gemm;
use crate::rng::{self, tag};
use rand::Rng;

/// One-hidden-layer projection network. `w1`/`b1` feed the ReLU hidden layer,
/// `w2`/`b2` produce the flat output of length `r·n` that [`forward`] reshapes
/// row-major into an n×r matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionNetwork {
    /// d×h input weights.
    pub w1: DMatrix<f64>,
    /// Hidden bias, length h.
    pub b1: DVector<f64>,
    /// h×(r·n) output weights.
    pub w2: DMatrix<f64>,
    /// Output bias, length r·n.
    pub b2: DVector<f64>,
    pub d: usize,
    pub h: usize,
    pub r: usize,
    pub n: usize,
}

/// Gradient (or any accumulator) shaped like a [`ProjectionNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrad {
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
}

impl NetGrad {
    pub fn zeros_like(net: &ProjectionNetwork) -> Self {
        NetGrad {
            w1: DMatrix::zeros(net.w1.nrows(), net.w1.ncols()),
            b1: DVector::zeros(net.b1.len()),
            w2: DMatrix::zeros(net.w2.nrows(), net.w2.ncols()),
            b2: DVector::zeros(net.b2.len()),
        }
    }
}

/// Adam optimizer state: first/second moment accumulators plus the step
/// counter, with the conventional defaults (β₁ = 0.9, β₂ = 0.999, ε = 1e−8,
/// learning rate 1e−3).
#[derive(Debug, Clone)]
pub struct AdamState {
    m: NetGrad,
    v: NetGrad,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    pub fn new(net: &ProjectionNetwork) -> Self {
        AdamState {
            m: NetGrad::zeros_like(net),
            v: NetGrad::zeros_like(net),
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate: 1e-3,
        }
    }
}

/// Loss hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    /// Weight of the 1/‖W(x_i)‖² barrier (default 1e−3). Zero disables it,
    /// which is occasionally useful for isolating the pairwise term.
    pub lambda_reg: f64,
    /// Optimizer iterations for score training (default 100).
    pub iterations: usize,
    /// Scale the pairwise sum by 2/(n(n−1)) — the population-functional
    /// normalization. Off by default: both directions share n, so the
    /// comparison is unchanged and the raw sum is cheaper to reason about.
    pub normalize_pairs: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_reg: 1e-3,
            iterations: 100,
            normalize_pairs: false,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_reg >= 0.0) || !self.lambda_reg.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda_reg must be nonnegative and finite, got {}",
                self.lambda_reg
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidInput("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Glorot-uniform weights, zero hidden bias, and output bias drawn uniform in
/// [0.001, 0.01] so that ‖W(x)‖ > 0 at initialization even when every hidden
/// unit starts dead. The bias floor is deliberately small: it only has to
/// keep the barrier term finite, and a large shared offset would swamp the
/// early pairwise deviance with an artifact of the initialization that the
/// optimizer then spends its whole budget burning off. Deterministic in
/// `seed`; draw order is w1 then w2 (both column-major) then b2.
pub fn init_network(d: usize, h: usize, r: usize, n: usize, seed: u64) -> ProjectionNetwork {
    assert!(d > 0 && h > 0 && r > 0 && n > 0, "network dimensions must be positive");
    let mut rng = rng::stream(&[tag::NET_INIT, seed]);
    let rn = r * n;

    let lim1 = (6.0 / (d + h) as f64).sqrt();
    let w1 = DMatrix::from_fn(d, h, |_, _| lim1 * (2.0 * rng.gen::<f64>() - 1.0));
    let lim2 = (6.0 / (h + rn) as f64).sqrt();
    let w2 = DMatrix::from_fn(h, rn, |_, _| lim2 * (2.0 * rng.gen::<f64>() - 1.0));
    let b2 = DVector::from_fn(rn, |_, _| 0.001 + 0.009 * rng.gen::<f64>());

    ProjectionNetwork {
        w1,
        b1: DVector::zeros(h),
        w2,
        b2,
        d,
        h,
        r,
        n,
    }
}

/// The flat pre-reshape output W2ᵀ·relu(W1ᵀx + b1) + b2 of length r·n.
pub fn raw_output(net: &ProjectionNetwork, x: &[f64]) -> Result<DVector<f64>> {
    if x.len() != net.d {
        return Err(Error::InvalidInput(format!(
            "forward: input has dimension {}, network expects {}",
            x.len(),
            net.d
        )));
    }
    let xv = DVector::from_column_slice(x);
    let z1 = net.w1.tr_mul(&xv) + &net.b1;
    let hh = z1.map(|v| v.max(0.0));
    Ok(net.w2.tr_mul(&hh) + &net.b2)
}

/// W(x): the raw output reshaped row-major into n×r, so entry (k, j) is raw
/// element k·r + j.
pub fn forward(net: &ProjectionNetwork, x: &[f64]) -> Result<DMatrix<f64>> {
    let raw = raw_output(net, x)?;
    let r = net.r;
    Ok(DMatrix::from_fn(net.n, r, |k, j| raw[k * r + j]))
}

fn check_finite(net: &ProjectionNetwork) -> Result<()> {
    let ok = net.w1.iter().all(|v| v.is_finite())
        && net.b1.iter().all(|v| v.is_finite())
        && net.w2.iter().all(|v| v.is_finite())
        && net.b2.iter().all(|v| v.is_finite());
    if ok {
        Ok(())
    } else {
        Err(Error::Numeric(
            "projection network parameters are not finite".into(),
        ))
    }
}

fn check_shapes(
    net: &ProjectionNetwork,
    embeddings: &EmbeddingSet,
    x_samples: &DMatrix<f64>,
) -> Result<()> {
    let n = net.n;
    if embeddings.coeffs.ncols() != n || embeddings.coeffs.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "loss: coefficient matrix is {}x{}, network expects {n}x{n}",
            embeddings.coeffs.nrows(),
            embeddings.coeffs.ncols()
        )));
    }
    if x_samples.nrows() != n || x_samples.ncols() != net.d {
        return Err(Error::InvalidInput(format!(
            "loss: inputs are {}x{}, network expects {n}x{}",
            x_samples.nrows(),
            x_samples.ncols(),
            net.d
        )));
    }
    Ok(())
}

/// Batched forward pass over all samples. Columns index samples.
struct Batch {
    /// h×n pre-activations.
    z1: DMatrix<f64>,
    /// h×n hidden activations.
    hh: DMatrix<f64>,
    /// (r·n)×n flat outputs; column i is the pre-reshape W(x_i).
    out: DMatrix<f64>,
    /// r×n projected embeddings; column i is v_i = W(x_i)ᵀβ_i.
    v: DMatrix<f64>,
    /// ‖W(x_i)‖_F² per sample.
    q2: Vec<f64>,
}

fn batched(net: &ProjectionNetwork, coeffs: &DMatrix<f64>, xd: &DMatrix<f64>) -> Batch {
    let n = net.n;
    let r = net.r;
    let rn = r * n;

    let mut z1 = net.w1.tr_mul(xd);
    for mut col in z1.column_iter_mut() {
        col += &net.b1;
    }
    let hh = z1.map(|v| v.max(0.0));

    let mut out = DMatrix::zeros(rn, n);
    for mut col in out.column_iter_mut() {
        col.copy_from(&net.b2);
    }
    gemm(&mut out, 1.0, &net.w2, true, &hh, false, 1.0);

    // v_i = W(x_i)ᵀβ_i: contract the n "rows" of each flat column against β_i.
    let mut v = DMatrix::zeros(r, n);
    {
        let out_s = out.as_slice();
        let b_s = coeffs.as_slice();
        let v_s = v.as_mut_slice();
        for i in 0..n {
            let vb = i * r;
            for k in 0..n {
                let bki = b_s[i * n + k];
                let kb = i * rn + k * r;
                for j in 0..r {
                    v_s[vb + j] += bki * out_s[kb + j];
                }
            }
        }
    }

    let q2 = (0..n).map(|i| out.column(i).norm_squared()).collect();
    Batch { z1, hh, out, v, q2 }
}

/// Pair-sum scale factor; the pairwise term vanishes outright for n < 2.
fn pair_factor(n: usize, cfg: &LossConfig) -> f64 {
    if cfg.normalize_pairs {
        2.0 / (n as f64 * (n as f64 - 1.0))
    } else {
        1.0
    }
}

/// (total, pairwise-only) loss values for one batch.
fn loss_from_batch(batch: &Batch, cfg: &LossConfig, n: usize) -> (f64, f64) {
    let mut pairwise = 0.0;
    if n >= 2 {
        let vbar = batch.v.column_mean();
        let mut centered = 0.0;
        for i in 0..n {
            centered += (batch.v.column(i) - &vbar).norm_squared();
        }
        pairwise = pair_factor(n, cfg) * n as f64 * centered;
    }
    if batch.q2.iter().any(|&q| q == 0.0) {
        // A zero-norm projection makes the barrier undefined; report the
        // worst possible value so best-so-far tracking skips this iterate.
        return (f64::INFINITY, pairwise);
    }
    let reg = cfg.lambda_reg / n as f64 * batch.q2.iter().map(|q| 1.0 / q).sum::<f64>();
    (pairwise + reg, pairwise)
}

/// The regularized pairwise deviance of the projected conditional embeddings.
///
/// Returns `+∞` (not an error) when some ‖W(x_i)‖ is exactly zero, so a
/// best-so-far tracker naturally skips the iterate.
pub fn loss(
    net: &ProjectionNetwork,
    embeddings: &EmbeddingSet,
    cfg: &LossConfig,
    x_samples: &DMatrix<f64>,
) -> Result<f64> {
    loss_parts(net, embeddings, cfg, x_samples).map(|(total, _)| total)
}

/// Like [`loss`], but also returns the bare pairwise term (no barrier),
/// which score diagnostics report alongside the regularized value.
pub(crate) fn loss_parts(
    net: &ProjectionNetwork,
    embeddings: &EmbeddingSet,
    cfg: &LossConfig,
    x_samples: &DMatrix<f64>,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    check_finite(net)?;
    check_shapes(net, embeddings, x_samples)?;
    let xd = x_samples.transpose();
    let batch = batched(net, &embeddings.coeffs, &xd);
    Ok(loss_from_batch(&batch, cfg, net.n))
}

/// Loss value together with its exact gradient for every parameter.
///
/// When the loss is the zero-norm sentinel `+∞`, the gradient is returned as
/// all zeros: the barrier has no usable direction there, and a zero gradient
/// lets Adam coast on momentum out of the degenerate region.
pub fn loss_grad(
    net: &ProjectionNetwork,
    embeddings: &EmbeddingSet,
    cfg: &LossConfig,
    x_samples: &DMatrix<f64>,
) -> Result<(f64, NetGrad)> {
    loss_grad_parts(net, embeddings, cfg, x_samples).map(|(total, _, grad)| (total, grad))
}

/// Gradient evaluation that also reports the bare pairwise term.
pub(crate) fn loss_grad_parts(
    net: &ProjectionNetwork,
    embeddings: &EmbeddingSet,
    cfg: &LossConfig,
    x_samples: &DMatrix<f64>,
) -> Result<(f64, f64, NetGrad)> {
    cfg.validate()?;
    check_finite(net)?;
    check_shapes(net, embeddings, x_samples)?;
    let n = net.n;
    let r = net.r;
    let rn = r * n;
    let xd = x_samples.transpose();
    let batch = batched(net, &embeddings.coeffs, &xd);

    let (value, pairwise) = loss_from_batch(&batch, cfg, n);
    if !value.is_finite() {
        return Ok((value, pairwise, NetGrad::zeros_like(net)));
    }

    // ∂pair/∂v_i = 2n·factor·(v_i − v̄); the v̄ cross-terms cancel.
    let scale = 2.0 * n as f64 * pair_factor(n, cfg);
    let mut gv = batch.v.clone();
    if n >= 2 {
        let vbar = batch.v.column_mean();
        for mut col in gv.column_iter_mut() {
            col -= &vbar;
        }
        gv *= scale;
    } else {
        gv.fill(0.0);
    }

    // ∂/∂out_i: route ∂pair/∂v_i back through v_i = W(x_i)ᵀβ_i, plus the
    // barrier term −(2λ_reg/n)·out_i/q2_i².
    let mut g_out = DMatrix::zeros(rn, n);
    {
        let out_s = batch.out.as_slice();
        let b_s = embeddings.coeffs.as_slice();
        let gv_s = gv.as_slice();
        let go_s = g_out.as_mut_slice();
        for i in 0..n {
            let q2 = batch.q2[i];
            let ci = 2.0 * cfg.lambda_reg / (n as f64 * q2 * q2);
            for k in 0..n {
                let bki = b_s[i * n + k];
                let kb = i * rn + k * r;
                let gb = i * r;
                for j in 0..r {
                    go_s[kb + j] = bki * gv_s[gb + j] - ci * out_s[kb + j];
                }
            }
        }
    }

    let mut grad = NetGrad::zeros_like(net);
    grad.b2 = g_out.column_sum();
    gemm(&mut grad.w2, 1.0, &batch.hh, false, &g_out, true, 0.0);

    let mut g_h = DMatrix::zeros(net.h, n);
    gemm(&mut g_h, 1.0, &net.w2, false, &g_out, false, 0.0);
    let g_z1 = g_h.zip_map(&batch.z1, |g, z| if z > 0.0 { g } else { 0.0 });
    grad.b1 = g_z1.column_sum();
    grad.w1 = &xd * g_z1.transpose();

    Ok((value, pairwise, grad))
}

fn adam_update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], s: &AdamState) {
    let bc1 = 1.0 - s.beta1.powi(s.t as i32);
    let bc2 = 1.0 - s.beta2.powi(s.t as i32);
    for i in 0..p.len() {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        let mhat = m[i] / bc1;
        let vhat = v[i] / bc2;
        p[i] -= s.learning_rate * mhat / (vhat.sqrt() + s.epsilon);
    }
}

/// One bias-corrected Adam update of every parameter, in place.
pub fn adam_step(net: &mut ProjectionNetwork, grad: &NetGrad, state: &mut AdamState) {
    assert_eq!(grad.w1.shape(), net.w1.shape(), "adam_step: w1 shape mismatch");
    assert_eq!(grad.w2.shape(), net.w2.shape(), "adam_step: w2 shape mismatch");
    assert_eq!(grad.b1.len(), net.b1.len(), "adam_step: b1 shape mismatch");
    assert_eq!(grad.b2.len(), net.b2.len(), "adam_step: b2 shape mismatch");
    state.t += 1;
    let s = state.clone();
    adam_update(
        net.w1.as_mut_slice(),
        grad.w1.as_slice(),
        state.m.w1.as_mut_slice(),
        state.v.w1.as_mut_slice(),
        &s,
    );
    adam_update(
        net.b1.as_mut_slice(),
        grad.b1.as_slice(),
        state.m.b1.as_mut_slice(),
        state.v.b1.as_mut_slice(),
        &s,
    );
    adam_update(
        net.w2.as_mut_slice(),
        grad.w2.as_slice(),
        state.m.w2.as_mut_slice(),
        state.v.w2.as_mut_slice(),
        &s,
    );
    adam_update(
        net.b2.as_mut_slice(),
        grad.b2.as_slice(),
        state.m.b2.as_mut_slice(),
        state.v.b2.as_mut_slice(),
        &s,
    );
}
