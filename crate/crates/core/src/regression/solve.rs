//! Dense least-squares kernels used by the surrogate fits.

use nalgebra::linalg::{Cholesky, SVD};

use crate::error::{Result, ZoError};
use crate::linalg::{ensure_finite, ensure_finite_matrix, DenseMatrix, DenseVector};

/// Denominators of the two rank-1 steps below this magnitude are treated as
/// singular.
pub const SINGULAR_UPDATE_TOL: f64 = 1e-12;

/// Relative size of the smallest triangular pivot the QR route accepts before
/// handing the problem to the SVD.
const QR_PIVOT_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresSolution {
    pub coeffs: DenseVector,
    pub residual_norm: f64,
    /// Numerical rank used by the solve.
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `X θ ≈ y` (the Moore–Penrose
/// pseudoinverse applied to `y`).
///
/// Well-conditioned problems of full rank go through a Householder QR (of `X`
/// when tall, of `Xᵀ` when wide). Everything else, including every
/// rank-deficient system, goes through an SVD that discards singular values
/// below `max(m, n) · ε · σ_max`.
pub fn solve_least_squares(x: &DenseMatrix, y: &DenseVector) -> Result<LeastSquaresSolution> {
    let (m, n) = x.shape();
    if m == 0 || n == 0 {
        return Err(ZoError::precondition("least-squares system must be non-empty"));
    }
    if y.len() != m {
        return Err(ZoError::DimensionMismatch {
            expected: m,
            actual: y.len(),
        });
    }
    ensure_finite_matrix(x, "design matrix")?;
    ensure_finite(y, "right-hand side")?;

    let coeffs = match solve_qr(x, y) {
        Some(c) => (c, m.min(n)),
        None => solve_svd(x, y)?,
    };
    let (coeffs, rank) = coeffs;
    ensure_finite(&coeffs, "least-squares solution")?;
    let residual_norm = (x * &coeffs - y).norm();
    Ok(LeastSquaresSolution {
        coeffs,
        residual_norm,
        rank,
    })
}

fn pivots_ok(r: &DenseMatrix) -> bool {
    let k = r.nrows().min(r.ncols());
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    max > 0.0 && diag.iter().all(|&p| p > QR_PIVOT_RATIO * max)
}

fn solve_qr(x: &DenseMatrix, y: &DenseVector) -> Option<DenseVector> {
    let (m, n) = x.shape();
    if m >= n {
        let qr = x.clone().qr();
        let r = qr.r();
        if !pivots_ok(&r) {
            return None;
        }
        let mut qty = y.clone();
        qr.q_tr_mul(&mut qty);
        let top = qty.rows(0, n).into_owned();
        r.solve_upper_triangular(&top)
    } else {
        // X = Rᵀ Qᵀ, so the minimum-norm solution is Q R⁻ᵀ y.
        let qr = x.transpose().qr();
        let r = qr.r();
        if !pivots_ok(&r) {
            return None;
        }
        let z = r.tr_solve_upper_triangular(y)?;
        Some(qr.q() * z)
    }
}

fn solve_svd(x: &DenseMatrix, y: &DenseVector) -> Result<(DenseVector, usize)> {
    let (m, n) = x.shape();
    let svd = SVD::try_new(x.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| ZoError::Numeric("SVD did not converge".into()))?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = (m.max(n) as f64) * f64::EPSILON * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank == 0 {
        return Ok((DenseVector::zeros(n), 0));
    }
    let coeffs = svd.solve(y, tol).map_err(|e| ZoError::Numeric(e.to_string()))?;
    Ok((coeffs, rank))
}

/// Explicit pseudoinverse through the SVD, with the same cutoff as
/// [`solve_least_squares`].
pub fn pseudo_inverse(x: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_finite_matrix(x, "matrix")?;
    let (m, n) = x.shape();
    let svd = SVD::try_new(x.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| ZoError::Numeric("SVD did not converge".into()))?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = (m.max(n) as f64) * f64::EPSILON * smax;
    svd.pseudo_inverse(tol).map_err(|e| ZoError::Numeric(e.to_string()))
}

/// Replace one row of a Gram matrix in its inverse: given `A = (XᵀX)⁻¹`,
/// returns `(XᵀX − r_drop r_dropᵀ + r_add r_addᵀ)⁻¹` using two Sherman–Morrison
/// steps,
///
/// ```text
/// B   = A + (A r_drop)(A r_drop)ᵀ / (1 − r_dropᵀ A r_drop)
/// A'  = B − (B r_add)(B r_add)ᵀ / (1 + r_addᵀ B r_add)
/// ```
///
/// `A` must be symmetric. Costs O(n²).
pub fn rank1_swap_inverse(a_inv: &DenseMatrix, drop_row: &DenseVector, add_row: &DenseVector) -> Result<DenseMatrix> {
    let n = a_inv.nrows();
    if a_inv.ncols() != n {
        return Err(ZoError::precondition("inverse must be square"));
    }
    if drop_row.len() != n || add_row.len() != n {
        return Err(ZoError::DimensionMismatch {
            expected: n,
            actual: if drop_row.len() != n {
                drop_row.len()
            } else {
                add_row.len()
            },
        });
    }

    let a_drop = a_inv * drop_row;
    let den_drop = 1.0 - drop_row.dot(&a_drop);
    if !(den_drop.abs() >= SINGULAR_UPDATE_TOL) {
        return Err(ZoError::SingularUpdate { denominator: den_drop });
    }
    let mut b = a_inv.clone();
    b.ger(1.0 / den_drop, &a_drop, &a_drop, 1.0);

    let b_add = &b * add_row;
    let den_add = 1.0 + add_row.dot(&b_add);
    if !(den_add.abs() >= SINGULAR_UPDATE_TOL) {
        return Err(ZoError::SingularUpdate { denominator: den_add });
    }
    b.ger(-1.0 / den_add, &b_add, &b_add, 1.0);
    ensure_finite_matrix(&b, "updated inverse")?;
    Ok(b)
}

/// Inverse of a symmetric positive definite matrix through Cholesky, or
/// `None` when the factorization fails.
pub fn spd_inverse(a: &DenseMatrix) -> Option<DenseMatrix> {
    let inv = Cholesky::new(a.clone())?.inverse();
    inv.iter().all(|v| v.is_finite()).then_some(inv)
}

/// Estimate of `cond(XᵀX)` from 20 steps of power iteration for the largest
/// eigenvalue and 20 steps of inverse iteration (Cholesky solves) for the
/// smallest. Returns infinity when `XᵀX` is numerically singular.
pub fn gram_condition_estimate(x: &DenseMatrix) -> f64 {
    const STEPS: usize = 20;
    let g = x.tr_mul(x);
    let n = g.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let start = DenseVector::from_fn(n, |i, _| 1.0 + 0.3 * ((i as f64) * 1.7).cos());

    let mut v = start.normalize();
    let mut lmax = 0.0;
    for _ in 0..STEPS {
        let w = &g * &v;
        lmax = v.dot(&w);
        let nw = w.norm();
        if nw == 0.0 {
            return f64::INFINITY;
        }
        v = w / nw;
    }

    let Some(chol) = Cholesky::new(g) else {
        return f64::INFINITY;
    };
    let mut v = start.normalize();
    let mut inv_lmin = 0.0;
    for _ in 0..STEPS {
        let w = chol.solve(&v);
        inv_lmin = v.dot(&w);
        let nw = w.norm();
        if !nw.is_finite() || nw == 0.0 {
            return f64::INFINITY;
        }
        v = w / nw;
    }
    if inv_lmin > 0.0 && inv_lmin.is_finite() {
        lmax * inv_lmin
    } else {
        f64::INFINITY
    }
}
