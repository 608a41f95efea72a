//! Small dense-matrix helpers shared by the dynamics and certificate code.
//!
//! The row-dot helper is the single source of truth for `(Hx)_i`: the
//! descent step, the linearized cocycle, and the quadratic objective all
//! call it so that their iterates agree bit-for-bit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `(H x)_i` accumulated strictly left-to-right.
///
/// Every code path that needs a single gradient component of a quadratic
/// form goes through here; changing the accumulation order breaks the
/// bit-level replay contracts.
#[inline]
pub fn row_dot(h: &DMatrix<f64>, i: usize, x: &DVector<f64>) -> f64 {
    let d = x.len();
    let mut acc = 0.0;
    for k in 0..d {
        acc += h[(i, k)] * x[k];
    }
    acc
}

/// Maximum absolute entry-wise asymmetry `|H_ij - H_ji|`.
pub fn max_asymmetry(h: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    worst
}

/// Checks that `h` is square and symmetric to within `tol` (absolute,
/// relative to the largest entry).
pub fn require_symmetric(h: &DMatrix<f64>, tol: f64) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidParameter(format!(
            "matrix must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.amax().max(1.0);
    let asym = max_asymmetry(h);
    if asym > tol * scale {
        return Err(Error::NotSymmetric { max_asymmetry: asym });
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
pub fn symmetric_eigenvalues_sorted(h: &DMatrix<f64>) -> Vec<f64> {
    let mut eigs: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Spectral norm of a symmetric matrix (largest |eigenvalue|).
pub fn symmetric_spectral_norm(h: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues_sorted(h)
        .iter()
        .fold(0.0f64, |m, &e| m.max(e.abs()))
}

/// Smallest and largest singular values of a symmetric matrix above
/// `rel_tol * max`, i.e. ignoring its (numerical) kernel.
///
/// Returns `DegenerateMatrix` when every singular value sits below the
/// threshold (H = 0 up to noise).
pub fn positive_singular_range(h: &DMatrix<f64>, rel_tol: f64) -> Result<(f64, f64)> {
    let mut svals: Vec<f64> = symmetric_eigenvalues_sorted(h)
        .iter()
        .map(|e| e.abs())
        .collect();
    svals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let s_max = *svals.last().expect("nonempty matrix");
    let cutoff = rel_tol * s_max;
    let s_min = svals.iter().copied().find(|&s| s > cutoff);
    match s_min {
        Some(s_min) if s_max > 0.0 => Ok((s_min, s_max)),
        _ => Err(Error::DegenerateMatrix { tol: cutoff }),
    }
}

/// Frobenius distance between `a` and the identity.
pub fn identity_residual(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            let diff = a[(i, j)] - target;
            acc += diff * diff;
        }
    }
    acc.sqrt()
}

/// Orthonormal basis of the range of a symmetric matrix: eigenvectors
/// whose |eigenvalue| exceeds `rel_tol * max`.
pub fn range_basis(h: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let eig = h.clone().symmetric_eigen();
    let s_max = eig.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let cutoff = rel_tol * s_max;
    let cols: Vec<DVector<f64>> = (0..h.nrows())
        .filter(|&j| eig.eigenvalues[j].abs() > cutoff)
        .map(|j| eig.eigenvectors.column(j).into_owned())
        .collect();
    DMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_dot_matches_manual_expansion() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]);
        let x = DVector::from_vec(vec![2.0, 3.0]);
        // Strict left-to-right: (1*2) + (0.5*3).
        assert_eq!(row_dot(&h, 0, &x), 1.0 * 2.0 + 0.5 * 3.0);
        assert_eq!(row_dot(&h, 1, &x), 0.5 * 2.0 + (-1.0) * 3.0);
    }

    #[test]
    fn asymmetry_detects_off_diagonal_mismatch() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, -1.0]);
        assert!((max_asymmetry(&h) - 0.1).abs() < 1e-15);
        assert!(require_symmetric(&h, 1e-9).is_err());
    }

    #[test]
    fn singular_range_skips_kernel() {
        // diag(2, 0, -1): positive singular values {1, 2}.
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0, -1.0]));
        let (lo, hi) = positive_singular_range(&h, 1e-12).unwrap();
        assert_eq!((lo, hi), (1.0, 2.0));
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let h = DMatrix::zeros(2, 2);
        assert!(matches!(
            positive_singular_range(&h, 1e-12),
            Err(Error::DegenerateMatrix { .. })
        ));
    }

    #[test]
    fn range_basis_of_singular_matrix_spans_nonzero_eigendirections() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0, -1.0]));
        let basis = range_basis(&h, 1e-12);
        assert_eq!(basis.ncols(), 2);
        // Each basis vector must be (up to sign) e1 or e3.
        for c in basis.column_iter() {
            assert!(c[1].abs() < 1e-14);
        }
    }
}
