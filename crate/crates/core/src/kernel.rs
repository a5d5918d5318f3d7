//! Kernel evaluations, gram matrices, bandwidth selection, and regularized
//! solves — the shared numeric substrate of every scorer in this crate.
//!
//! Three kernels are supported:
//!
//! | family          | k(x, y)                                            |
//! |-----------------|----------------------------------------------------|
//! | `Rbf`           | σ_f² · exp(−‖x−y‖² / (2ℓ²))                        |
//! | `Rq`            | 1 − ‖x−y‖² / (‖x−y‖² + 1)                          |
//! | `ProductRbfRq`  | product of the two (the default used by scorers)   |
//!
//! The RBF length-scale is normally chosen by [`median_heuristic`]: the median
//! of all pairwise Euclidean distances of the sample, applied per variable and
//! per direction. Regularized systems (K + λI)X = B are solved by Cholesky
//! factorization — gram matrices are positive semidefinite by construction, so
//! the λ-jitter makes them positive definite and a symmetric factorization is
//! both cheaper and more stable than general elimination.
//!
//! Everything here is a pure function of its inputs and safe to call from any
//! number of threads.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Kernel families available to the scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Rbf,
    Rq,
    /// RBF × RQ. The default for all kernel scorers.
    ProductRbfRq,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Rbf => "rbf",
            KernelFamily::Rq => "rq",
            KernelFamily::ProductRbfRq => "rbf*rq",
        }
    }
}

/// Kernel family plus its hyperparameters.
///
/// `length_scale` and `amplitude` only affect the RBF factor; the RQ kernel is
/// parameter-free. `reg` is the ridge term λ used whenever a gram matrix built
/// from this config is inverted.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub family: KernelFamily,
    /// RBF length-scale ℓ, in data units. Scorers replace it with the
    /// median heuristic of the variable at hand.
    pub length_scale: f64,
    /// RBF signal amplitude σ_f (the kernel value at zero distance is σ_f²).
    pub amplitude: f64,
    /// Ridge regularization λ for (K + λI) solves.
    pub reg: f64,
}

impl KernelConfig {
    /// Product-kernel config with the given length-scale, σ_f = 1, λ = 1e-3.
    pub fn product(length_scale: f64) -> Self {
        KernelConfig {
            family: KernelFamily::ProductRbfRq,
            length_scale,
            amplitude: 1.0,
            reg: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale > 0.0) || !self.length_scale.is_finite() {
            return Err(Error::InvalidInput(format!(
                "kernel length_scale must be positive and finite, got {}",
                self.length_scale
            )));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidInput(format!(
                "kernel amplitude must be positive and finite, got {}",
                self.amplitude
            )));
        }
        if !(self.reg >= 0.0) || !self.reg.is_finite() {
            return Err(Error::InvalidInput(format!(
                "kernel reg must be nonnegative and finite, got {}",
                self.reg
            )));
        }
        Ok(())
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig::product(1.0)
    }
}

/// A dense n×n matrix of pairwise kernel evaluations.
///
/// Construction through [`gram`] guarantees exact symmetry (the upper triangle
/// is mirrored) and positive semidefiniteness up to roundoff.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub n: usize,
}

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// σ_f² · exp(−‖x−y‖² / (2ℓ²)).
pub fn rbf_eval(x: &[f64], y: &[f64], length_scale: f64, amplitude: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "rbf_eval: dimension mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let d2 = dist_sq(x, y);
    Ok(amplitude * amplitude * (-d2 / (2.0 * length_scale * length_scale)).exp())
}

/// 1 − d²/(d²+1) where d = ‖x−y‖. Equals 1/(1+d²); parameter-free.
pub fn rq_eval(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "rq_eval: dimension mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    let d2 = dist_sq(x, y);
    Ok(1.0 - d2 / (d2 + 1.0))
}

/// RBF × RQ under the given config (which must be `ProductRbfRq`).
pub fn product_eval(x: &[f64], y: &[f64], config: &KernelConfig) -> Result<f64> {
    if config.family != KernelFamily::ProductRbfRq {
        return Err(Error::InvalidInput(format!(
            "product_eval requires the product family, got {}",
            config.family.name()
        )));
    }
    Ok(rbf_eval(x, y, config.length_scale, config.amplitude)? * rq_eval(x, y)?)
}

/// One kernel evaluation under any family.
pub fn kernel_eval(x: &[f64], y: &[f64], config: &KernelConfig) -> Result<f64> {
    match config.family {
        KernelFamily::Rbf => rbf_eval(x, y, config.length_scale, config.amplitude),
        KernelFamily::Rq => rq_eval(x, y),
        KernelFamily::ProductRbfRq => product_eval(x, y, config),
    }
}

/// Gram matrix of a sample under `config`. Points are the rows of `points`.
///
/// The lower triangle is a mirror of the upper one, so the result is
/// symmetric to the last bit.
pub fn gram(points: &DMatrix<f64>, config: &KernelConfig) -> Result<GramMatrix> {
    config.validate()?;
    let n = points.nrows();
    if n == 0 || points.ncols() == 0 {
        return Err(Error::InvalidInput("gram: empty input".into()));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| points.row(i).iter().copied().collect()).collect();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel_eval(&rows[i], &rows[j], config)?;
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(GramMatrix { entries, n })
}

/// Median of the n(n−1)/2 pairwise Euclidean distances; the conventional
/// length-scale choice. Points are the rows of `points`.
///
/// Errors when fewer than two points are given or the median distance is zero
/// (identical or mostly-identical samples), because a zero bandwidth makes
/// every downstream kernel degenerate.
pub fn median_heuristic(points: &DMatrix<f64>) -> Result<f64> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "median_heuristic needs at least 2 points, got {n}"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|i| points.row(i).iter().copied().collect()).collect();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(dist_sq(&rows[i], &rows[j]).sqrt());
        }
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median <= 0.0 {
        return Err(Error::Degenerate(
            "median pairwise distance is zero (constant or mostly-constant variable)".into(),
        ));
    }
    Ok(median)
}

/// Solve (K + λI) X = B by Cholesky factorization.
///
/// `context` names the matrix in error messages (e.g. `"K_x"`), because a
/// factorization failure usually means λ was too small for a rank-deficient
/// gram matrix and the caller's name for it is the useful diagnostic.
pub fn regularized_solve(
    k: &GramMatrix,
    lambda: f64,
    b: &DMatrix<f64>,
    context: &str,
) -> Result<DMatrix<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "regularized_solve: lambda must be nonnegative and finite, got {lambda}"
        )));
    }
    if b.nrows() != k.n {
        return Err(Error::InvalidInput(format!(
            "regularized_solve: B has {} rows, expected {}",
            b.nrows(),
            k.n
        )));
    }
    let mut reg = k.entries.clone();
    for i in 0..k.n {
        reg[(i, i)] += lambda;
    }
    let chol = reg.cholesky().ok_or_else(|| {
        Error::Numeric(format!(
            "cholesky factorization of {context} + {lambda}*I failed (matrix not positive definite; \
             increase the regularization)"
        ))
    })?;
    Ok(chol.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(vals: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(vals.len(), 1, vals)
    }

    #[test]
    fn rbf_closed_forms() {
        // Zero distance hits the amplitude squared.
        assert_eq!(rbf_eval(&[1.0, 2.0], &[1.0, 2.0], 3.0, 1.0).unwrap(), 1.0);
        // Squared distance 2ℓ² gives exp(−1).
        let v = rbf_eval(&[0.0], &[2.0], f64::sqrt(2.0), 1.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        // σ_f = 2, d² = 9, ℓ = 1 → 4·exp(−4.5).
        let v = rbf_eval(&[0.0], &[3.0], 1.0, 2.0).unwrap();
        assert!((v - 4.0 * (-4.5f64).exp()).abs() < 1e-15);
        assert!(rbf_eval(&[0.0], &[0.0, 1.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn rq_closed_forms() {
        assert_eq!(rq_eval(&[5.0], &[5.0]).unwrap(), 1.0);
        assert!((rq_eval(&[0.0], &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        // d² = 3 → 1 − 3/4 = 0.25.
        assert!((rq_eval(&[0.0], &[3.0f64.sqrt()]).unwrap() - 0.25).abs() < 1e-15);
        assert!(rq_eval(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn product_closed_forms() {
        let cfg = KernelConfig::product(1.0);
        assert_eq!(product_eval(&[2.0], &[2.0], &cfg).unwrap(), 1.0);
        let v = product_eval(&[0.0], &[1.0], &cfg).unwrap();
        assert!((v - (-0.5f64).exp() * 0.5).abs() < 1e-15);
        let v = product_eval(&[0.0], &[2.0f64.sqrt()], &cfg).unwrap();
        assert!((v - (-1.0f64).exp() / 3.0).abs() < 1e-15);
        let mut bad = cfg;
        bad.family = KernelFamily::Rbf;
        assert!(product_eval(&[0.0], &[1.0], &bad).is_err());
    }

    #[test]
    fn gram_small_cases() {
        let cfg = KernelConfig {
            family: KernelFamily::Rbf,
            length_scale: 1.0,
            amplitude: 1.0,
            reg: 0.0,
        };
        let g = gram(&col(&[0.7]), &cfg).unwrap();
        assert_eq!(g.n, 1);
        assert_eq!(g.entries[(0, 0)], 1.0);

        let g = gram(&col(&[0.3, 0.3]), &cfg).unwrap();
        assert_eq!(g.entries, DMatrix::from_element(2, 2, 1.0));

        let g = gram(&col(&[0.0, 1.0, 3.0]), &cfg).unwrap();
        assert!((g.entries[(0, 1)] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((g.entries[(0, 2)] - (-4.5f64).exp()).abs() < 1e-15);
        assert!((g.entries[(1, 2)] - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.entries, g.entries.transpose());
    }

    #[test]
    fn median_heuristic_hand_cases() {
        assert_eq!(median_heuristic(&col(&[0.0, 1.0, 3.0])).unwrap(), 2.0);
        assert_eq!(median_heuristic(&col(&[0.0, 2.0])).unwrap(), 2.0);
        // Distances {1,2,4,1,3,2} → sorted {1,1,2,2,3,4} → median 2 (mean of middle two).
        assert_eq!(median_heuristic(&col(&[0.0, 1.0, 2.0, 4.0])).unwrap(), 2.0);
        assert!(matches!(
            median_heuristic(&col(&[1.5, 1.5, 1.5])),
            Err(Error::Degenerate(_))
        ));
        assert!(median_heuristic(&col(&[1.0])).is_err());
    }

    #[test]
    fn regularized_solve_diagonal_cases() {
        let k = GramMatrix {
            entries: DMatrix::identity(2, 2),
            n: 2,
        };
        let x = regularized_solve(&k, 1.0, &DMatrix::identity(2, 2), "K").unwrap();
        assert!((x - DMatrix::from_diagonal_element(2, 2, 0.5)).norm() < 1e-14);

        let k = GramMatrix {
            entries: DMatrix::from_diagonal_element(2, 2, 2.0),
            n: 2,
        };
        let b = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let x = regularized_solve(&k, 0.0, &b, "K").unwrap();
        assert!((x[(0, 0)] - 0.5).abs() < 1e-15 && (x[(1, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn regularized_solve_names_the_matrix_on_failure() {
        // A singular matrix with λ = 0 cannot be factorized.
        let k = GramMatrix {
            entries: DMatrix::from_element(3, 3, 1.0),
            n: 3,
        };
        let err = regularized_solve(&k, 0.0, &DMatrix::identity(3, 3), "K_x").unwrap_err();
        match err {
            Error::Numeric(msg) => assert!(msg.contains("K_x"), "missing context in: {msg}"),
            other => panic!("expected numeric error, got {other:?}"),
        }
    }
}
