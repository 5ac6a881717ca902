//! Dense vector/matrix aliases and boundary checks.

use crate::error::{Result, ZoError};

/// Iterates, directions and coefficient vectors.
pub type DenseVector = nalgebra::DVector<f64>;
/// Design matrices, Gram matrices and their inverses (column-major storage).
pub type DenseMatrix = nalgebra::DMatrix<f64>;

pub fn ensure_finite(v: &DenseVector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ZoError::Numeric(format!("{what} contains non-finite entries")))
    }
}

pub fn ensure_finite_matrix(m: &DenseMatrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ZoError::Numeric(format!("{what} contains non-finite entries")))
    }
}

pub fn ensure_dim(v: &DenseVector, expected: usize) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(ZoError::DimensionMismatch {
            expected,
            actual: v.len(),
        })
    }
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration, stopped once successive estimates agree to `rel_tol`.
pub fn power_iteration_max_eig(a: &DenseMatrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    // Deterministic, non-degenerate start vector.
    let mut v = DenseVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_7).sin());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = a * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - lambda).abs() <= rel_tol * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}
