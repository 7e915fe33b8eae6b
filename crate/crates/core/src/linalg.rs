//! Nonnegative-matrix utilities: companion lifting, spectral radius, contraction lag.

use nalgebra::DMatrix;

/// Cap on the matrix power searched for the contraction lag.
pub const MAX_CONTRACTION_LAG: usize = 10_000;

/// Block companion matrix with `blocks` on the top block row and an identity
/// on the block sub-diagonal. All blocks must be square with the same size.
pub fn companion(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let q = blocks.len();
    assert!(q > 0, "companion needs at least one block");
    let k = blocks[0].nrows();
    let n = k * q;
    let mut b = DMatrix::zeros(n, n);
    for (i, a) in blocks.iter().enumerate() {
        assert_eq!((a.nrows(), a.ncols()), (k, k));
        b.view_mut((0, i * k), (k, k)).copy_from(a);
    }
    for r in k..n {
        b[(r, r - k)] = 1.0;
    }
    b
}

pub fn sum_blocks(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let k = blocks[0].nrows();
    blocks.iter().fold(DMatrix::zeros(k, k), |acc, a| acc + a)
}

pub fn is_nonnegative(a: &DMatrix<f64>) -> bool {
    a.iter().all(|x| *x >= 0.0)
}

/// Induced 1-norm (maximum absolute column sum).
pub fn max_col_sum(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues as `(re, im)` pairs, sorted by decreasing modulus.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let mut ev: Vec<(f64, f64)> = a
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect();
    ev.sort_by(|x, y| y.0.hypot(y.1).total_cmp(&x.0.hypot(x.1)));
    ev
}

/// Spectral radius from the eigen-solver.
pub fn spectral_radius_eigen(a: &DMatrix<f64>) -> f64 {
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|c| c.re.hypot(c.im))
        .fold(0.0, f64::max)
}

/// Power-method estimate of the spectral radius of a nonnegative matrix.
///
/// Works on the shifted matrix `M = A + I`, whose Perron root strictly dominates
/// every other eigenvalue in modulus, and accelerates by repeated squaring.
/// Returns the estimate together with Collatz–Wielandt lower and upper bounds
/// for `ρ(A)` computed on the support of the final vector.
pub fn spectral_radius_power(a: &DMatrix<f64>) -> PowerEstimate {
    let n = a.nrows();
    let m = a + DMatrix::<f64>::identity(n, n);
    let mut p = m.clone();
    for _ in 0..64 {
        let s = max_col_sum(&p);
        p /= s;
        let next = &p * &p;
        let s2 = max_col_sum(&next);
        if s2 == 0.0 || !s2.is_finite() {
            break;
        }
        p = next;
    }
    let mut x = &p * nalgebra::DVector::from_element(n, 1.0);
    let mut est = 1.0;
    for _ in 0..8 {
        let norm: f64 = x.iter().sum();
        x /= norm;
        let y = &m * &x;
        est = y.iter().sum::<f64>();
        x = y;
    }
    let norm: f64 = x.iter().sum();
    x /= norm;
    let y = &m * &x;
    let floor = 1e-12 * x.max();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        if x[i] > floor {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    PowerEstimate {
        rho: (est - 1.0).max(0.0),
        lower: (lo - 1.0).max(0.0),
        upper: hi - 1.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Smallest `j ≥ 1` with `max colsum(B^j) < 1`, together with that column-sum maximum.
/// `None` when no such `j ≤ MAX_CONTRACTION_LAG` exists.
pub fn contraction_lag(b: &DMatrix<f64>) -> Option<(usize, f64)> {
    let n = b.nrows();
    let mut row = nalgebra::RowDVector::from_element(n, 1.0);
    for j in 1..=MAX_CONTRACTION_LAG {
        row = &row * b;
        let top = row.iter().fold(0.0_f64, |acc, x| acc.max(*x));
        if top < 1.0 {
            return Some((j, top));
        }
        if !top.is_finite() {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_layout() {
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let a2 = DMatrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        let b = companion(&[a1, a2]);
        #[rustfmt::skip]
        let want = DMatrix::from_row_slice(4, 4, &[
            1.0, 2.0, 5.0, 6.0,
            3.0, 4.0, 7.0, 8.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
        ]);
        assert_eq!(b, want);
    }

    #[test]
    fn radius_of_rank_one_matrix() {
        // [[a, b], [a, b]] has eigenvalues 0 and a + b.
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.5, 0.3, 0.5]);
        assert!((spectral_radius_eigen(&a) - 0.8).abs() < 1e-14);
        let p = spectral_radius_power(&a);
        assert!((p.rho - 0.8).abs() < 1e-13, "{p:?}");
        assert!(p.lower <= 0.8 + 1e-13 && p.upper >= 0.8 - 1e-13);
    }

    #[test]
    fn nilpotent_shift_has_zero_radius() {
        let b = companion(&[DMatrix::zeros(1, 1), DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)]);
        assert!(spectral_radius_power(&b).rho < 1e-12);
        // the sub-diagonal keeps unit column sums until B^3 = 0
        assert_eq!(contraction_lag(&b), Some((3, 0.0)));
    }

    #[test]
    fn periodic_matrix_converges_after_shift() {
        // permutation: eigenvalues are the cube roots of unity
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]) * 0.7;
        assert!((spectral_radius_power(&p).rho - 0.7).abs() < 1e-12);
    }

    #[test]
    fn scalar_ar2_lag() {
        // x_t = 0.5 x_{t-1} + 0.3 x_{t-2}: column sums of B are (1.5, 0.3)
        let b = companion(&[DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 0.3)]);
        let (m, top) = contraction_lag(&b).unwrap();
        // B^2 = [[0.55, 0.15], [0.5, 0.3]] has column sums (1.05, 0.45); B^3 column sums (0.575+... )
        let b2 = &b * &b;
        assert!(max_col_sum(&b2) >= 1.0);
        assert!(m >= 3);
        assert!(top < 1.0);
    }
}
