//! Thin strided wrapper over `matrixmultiply::dgemm` for the handful of large
//! products in projection-network training.
//!
//! `nalgebra`'s `tr_mul` multiplies through a naive inner loop that runs an
//! order of magnitude slower than a blocked kernel at the sizes the trainer
//! uses (hundreds × thousands). Rather than materializing transposes every
//! iteration, this wrapper passes transposed *views* by swapping the stride
//! pair — `matrixmultiply` handles arbitrary strides natively, so A and Aᵀ
//! cost the same.

use nalgebra::DMatrix;

/// C ← α · op(A) · op(B) + β · C, where `op` is the identity or the
/// transpose according to `ta` / `tb`.
///
/// Panics if the operand shapes do not agree with C; shapes are the caller's
/// contract, not data-dependent.
pub fn gemm(
    c: &mut DMatrix<f64>,
    alpha: f64,
    a: &DMatrix<f64>,
    ta: bool,
    b: &DMatrix<f64>,
    tb: bool,
    beta: f64,
) {
    let (m, k) = if ta { (a.ncols(), a.nrows()) } else { (a.nrows(), a.ncols()) };
    let (kb, n) = if tb { (b.ncols(), b.nrows()) } else { (b.nrows(), b.ncols()) };
    assert_eq!(k, kb, "gemm: inner dimensions differ ({k} vs {kb})");
    assert_eq!(c.nrows(), m, "gemm: C has {} rows, expected {m}", c.nrows());
    assert_eq!(c.ncols(), n, "gemm: C has {} cols, expected {n}", c.ncols());

    // nalgebra stores column-major: element (i, j) lives at i + j*nrows.
    // A transposed view swaps the two strides.
    let stride = |rows: usize, t: bool| -> (isize, isize) {
        if t {
            (rows as isize, 1)
        } else {
            (1, rows as isize)
        }
    };
    let (ars, acs) = stride(a.nrows(), ta);
    let (brs, bcs) = stride(b.nrows(), tb);
    let crows = c.nrows() as isize;

    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.as_slice().as_ptr(),
            ars,
            acs,
            b.as_slice().as_ptr(),
            brs,
            bcs,
            beta,
            c.as_mut_slice().as_mut_ptr(),
            1,
            crows,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx_eq(a: &DMatrix<f64>, b: &DMatrix<f64>) {
        assert_eq!(a.shape(), b.shape());
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn matches_nalgebra_in_all_transpose_modes() {
        let a = DMatrix::from_fn(4, 3, |i, j| (i * 7 + j * 3) as f64 * 0.1 - 0.5);
        let b = DMatrix::from_fn(3, 5, |i, j| (i * 2 + j) as f64 * 0.2 - 0.3);

        let mut c = DMatrix::zeros(4, 5);
        gemm(&mut c, 1.0, &a, false, &b, false, 0.0);
        approx_eq(&c, &(&a * &b));

        let mut c = DMatrix::zeros(3, 5);
        gemm(&mut c, 2.0, &a, true, &(&a * &b), false, 0.0);
        approx_eq(&c, &(2.0 * a.transpose() * &a * &b));

        let mut c = DMatrix::zeros(4, 3);
        gemm(&mut c, 1.0, &a, false, &DMatrix::identity(3, 3), true, 0.0);
        approx_eq(&c, &a);

        let at = a.transpose();
        let bt = b.transpose();
        let mut c = DMatrix::zeros(4, 5);
        gemm(&mut c, 1.5, &at, true, &bt, true, 0.0);
        approx_eq(&c, &(1.5 * &a * &b));
    }

    #[test]
    fn accumulates_with_beta() {
        let a = DMatrix::from_fn(2, 2, |i, j| (i + 2 * j) as f64);
        let mut c = DMatrix::from_element(2, 2, 1.0);
        gemm(&mut c, 1.0, &a, false, &a, false, 3.0);
        approx_eq(&c, &(&a * &a + DMatrix::from_element(2, 2, 3.0)));
    }

    #[test]
    #[should_panic(expected = "inner dimensions")]
    fn rejects_shape_mismatch() {
        let a = DMatrix::zeros(2, 3);
        let b = DMatrix::zeros(2, 3);
        let mut c = DMatrix::zeros(2, 3);
        gemm(&mut c, 1.0, &a, false, &b, false, 0.0);
    }
}
