//! Shared oracle machinery for the integration suites: straight-loop
//! re-implementations and flat parameter access used to cross-check the fast
//! paths. Each test target uses the subset it needs.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use kernel_deviance::embedding::EmbeddingSet;
use kernel_deviance::projection::{init_network, LossConfig, NetGrad, ProjectionNetwork};
use kernel_deviance::rng::stream;

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// A random problem instance: network, embeddings, and sample block.
pub fn random_instance(
    n: usize,
    r: usize,
    d: usize,
    h: usize,
    seed: u64,
) -> (ProjectionNetwork, EmbeddingSet, DMatrix<f64>) {
    let net = init_network(d, h, r, n, seed);
    let mut rng = stream(&[0xF0, seed]);
    let coeffs = random_matrix(n, n, &mut rng);
    let alphas = random_matrix(n, n, &mut rng);
    let x = random_matrix(n, d, &mut rng);
    (net, EmbeddingSet { alphas, coeffs }, x)
}

/// Straight-loop re-implementation of the loss: per-sample projection by
/// scalar loops, pairwise term as a literal double sum.
pub fn double_loop_loss(
    net: &ProjectionNetwork,
    emb: &EmbeddingSet,
    cfg: &LossConfig,
    x: &DMatrix<f64>,
) -> f64 {
    let (n, r, h) = (net.n, net.r, net.h);
    let mut projected = vec![vec![0.0; r]; n];
    let mut norms_sq = vec![0.0; n];
    for i in 0..n {
        // Hidden layer.
        let mut hidden = vec![0.0; h];
        for a in 0..h {
            let mut z = net.b1[a];
            for b in 0..net.d {
                z += net.w1[(b, a)] * x[(i, b)];
            }
            hidden[a] = z.max(0.0);
        }
        // Raw output, reshaped row-major to W[k][j].
        let mut w = vec![vec![0.0; r]; n];
        for k in 0..n {
            for j in 0..r {
                let flat = k * r + j;
                let mut z = net.b2[flat];
                for a in 0..h {
                    z += net.w2[(a, flat)] * hidden[a];
                }
                w[k][j] = z;
                norms_sq[i] += z * z;
            }
        }
        for j in 0..r {
            let mut v = 0.0;
            for k in 0..n {
                v += w[k][j] * emb.coeffs[(k, i)];
            }
            projected[i][j] = v;
        }
    }
    let mut pairwise = 0.0;
    for i in 0..n {
        for j in 0..i {
            let mut dist = 0.0;
            for a in 0..r {
                let diff = projected[i][a] - projected[j][a];
                dist += diff * diff;
            }
            pairwise += dist;
        }
    }
    if cfg.normalize_pairs {
        pairwise *= 2.0 / (n as f64 * (n as f64 - 1.0));
    }
    let mut reg = 0.0;
    for i in 0..n {
        reg += 1.0 / norms_sq[i];
    }
    pairwise + cfg.lambda_reg / n as f64 * reg
}

/// Flat view over (w1, b1, w2, b2), for coordinate-wise perturbations.
pub fn param_count(net: &ProjectionNetwork) -> usize {
    net.w1.len() + net.b1.len() + net.w2.len() + net.b2.len()
}

pub fn get_param(net: &ProjectionNetwork, idx: usize) -> f64 {
    let (n1, n2, n3) = (net.w1.len(), net.b1.len(), net.w2.len());
    if idx < n1 {
        net.w1.as_slice()[idx]
    } else if idx < n1 + n2 {
        net.b1.as_slice()[idx - n1]
    } else if idx < n1 + n2 + n3 {
        net.w2.as_slice()[idx - n1 - n2]
    } else {
        net.b2.as_slice()[idx - n1 - n2 - n3]
    }
}

pub fn set_param(net: &mut ProjectionNetwork, idx: usize, value: f64) {
    let (n1, n2, n3) = (net.w1.len(), net.b1.len(), net.w2.len());
    if idx < n1 {
        net.w1.as_mut_slice()[idx] = value;
    } else if idx < n1 + n2 {
        net.b1.as_mut_slice()[idx - n1] = value;
    } else if idx < n1 + n2 + n3 {
        net.w2.as_mut_slice()[idx - n1 - n2] = value;
    } else {
        net.b2.as_mut_slice()[idx - n1 - n2 - n3] = value;
    }
}

pub fn grad_param(grad: &NetGrad, idx: usize) -> f64 {
    let (n1, n2, n3) = (grad.w1.len(), grad.b1.len(), grad.w2.len());
    if idx < n1 {
        grad.w1.as_slice()[idx]
    } else if idx < n1 + n2 {
        grad.b1.as_slice()[idx - n1]
    } else if idx < n1 + n2 + n3 {
        grad.w2.as_slice()[idx - n1 - n2]
    } else {
        grad.b2.as_slice()[idx - n1 - n2 - n3]
    }
}

/// Explicit-inverse re-implementation of the ridge system behind the
/// conditional embeddings.
pub fn explicit_embeddings(
    k_x: &DMatrix<f64>,
    k_y: &DMatrix<f64>,
    lambda: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = k_x.nrows();
    let reg = k_x + DMatrix::<f64>::identity(n, n) * lambda;
    let inv = reg.try_inverse().expect("well-conditioned test matrix");
    let alphas = &inv * k_x;
    let coeffs = k_y * &alphas;
    (alphas, coeffs)
}
