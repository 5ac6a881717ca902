//! Sliding-window surrogate fitting.
//!
//! Every design matrix lists the window newest point first, so row `i`
//! (zero-based) belongs to the point evaluated `i` iterations before the
//! newest one.

mod solve;
mod window;

use serde::{Deserialize, Serialize};

pub use solve::{
    gram_condition_estimate, pseudo_inverse, rank1_swap_inverse, solve_least_squares, spd_inverse,
    LeastSquaresSolution, SINGULAR_UPDATE_TOL,
};
pub use window::{EvaluationWindow, InverseCache};

use crate::error::{Result, ZoError};
use crate::linalg::{DenseMatrix, DenseVector};

/// Largest accepted cosine between the cached-path residual and any design
/// column. Above it the fit is recomputed through the full solve.
const CACHE_DEFECT_TOL: f64 = 1e-7;
/// Refinement passes applied to the cached-inverse solution.
const REFINEMENT_PASSES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearMode {
    /// Rows `(x̂_i − x̂_t, 1)`, targets `f_i − f_t`.
    #[default]
    InterceptCentered,
    /// Rows `(x̂_i, 1)`, targets `f_i`.
    InterceptRaw,
    /// Rows `x̂_i − x̂_t` for the `m − 1` older points, targets `f_i − f_t`.
    DifferenceNoIntercept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPath {
    Pseudoinverse,
    CachedRank1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateFit {
    /// Slope of the surrogate at the newest point.
    pub g: DenseVector,
    /// Diagonal curvature, quadratic fits only.
    pub h: Option<DenseVector>,
    /// Intercept, absent in difference mode.
    pub c: Option<f64>,
    pub residual_norm: f64,
    pub solver_path: SolverPath,
}

fn require_samples(window: &EvaluationWindow) -> Result<()> {
    if window.len() < 2 {
        return Err(ZoError::NotEnoughSamples {
            have: window.len(),
            need: 2,
        });
    }
    Ok(())
}

pub fn assemble_linear_system(window: &EvaluationWindow, mode: LinearMode) -> Result<(DenseMatrix, DenseVector)> {
    require_samples(window)?;
    let d = window.dimension();
    let m = window.len();
    let (newest, f_newest) = window.newest().expect("non-empty");
    let pairs = window.points().rev().zip(window.values().rev());

    match mode {
        LinearMode::InterceptCentered | LinearMode::InterceptRaw => {
            let centered = mode == LinearMode::InterceptCentered;
            let mut x = DenseMatrix::zeros(m, d + 1);
            let mut y = DenseVector::zeros(m);
            for (i, (p, &v)) in pairs.enumerate() {
                for j in 0..d {
                    x[(i, j)] = if centered { p[j] - newest[j] } else { p[j] };
                }
                x[(i, d)] = 1.0;
                y[i] = if centered { v - f_newest } else { v };
            }
            Ok((x, y))
        }
        LinearMode::DifferenceNoIntercept => {
            let mut x = DenseMatrix::zeros(m - 1, d);
            let mut y = DenseVector::zeros(m - 1);
            for (i, (p, &v)) in pairs.skip(1).enumerate() {
                for j in 0..d {
                    x[(i, j)] = p[j] - newest[j];
                }
                y[i] = v - f_newest;
            }
            Ok((x, y))
        }
    }
}

/// Rows `(Δx, ½ Δx⊙Δx, 1)` with `Δx = x̂_i − x̂_t`, targets `f_i − f_t`.
pub fn assemble_quadratic_system(window: &EvaluationWindow) -> Result<(DenseMatrix, DenseVector)> {
    require_samples(window)?;
    let d = window.dimension();
    let m = window.len();
    let (newest, f_newest) = window.newest().expect("non-empty");
    let mut x = DenseMatrix::zeros(m, 2 * d + 1);
    let mut y = DenseVector::zeros(m);
    for (i, (p, &v)) in window.points().rev().zip(window.values().rev()).enumerate() {
        for j in 0..d {
            let dx = p[j] - newest[j];
            x[(i, j)] = dx;
            x[(i, d + j)] = 0.5 * dx * dx;
        }
        x[(i, 2 * d)] = 1.0;
        y[i] = v - f_newest;
    }
    Ok((x, y))
}

/// Fit a linear surrogate. With `use_fast_path`, intercept modes reuse the
/// window's cached Gram inverse when one is available; otherwise, and for
/// difference mode, the minimum-norm least-squares solve runs.
pub fn fit_linear(window: &EvaluationWindow, mode: LinearMode, use_fast_path: bool) -> Result<SurrogateFit> {
    require_samples(window)?;
    if use_fast_path && mode != LinearMode::DifferenceNoIntercept {
        if let Some(cache) = window.inverse_cache() {
            if let Some(fit) = fit_from_cache(window, cache, mode) {
                return Ok(fit);
            }
        }
    }
    let (x, y) = assemble_linear_system(window, mode)?;
    let sol = solve_least_squares(&x, &y)?;
    let d = window.dimension();
    let (g, c) = match mode {
        LinearMode::DifferenceNoIntercept => (sol.coeffs, None),
        _ => (sol.coeffs.rows(0, d).into_owned(), Some(sol.coeffs[d])),
    };
    Ok(SurrogateFit {
        g,
        h: None,
        c,
        residual_norm: sol.residual_norm,
        solver_path: SolverPath::Pseudoinverse,
    })
}

fn fit_from_cache(window: &EvaluationWindow, cache: &InverseCache, mode: LinearMode) -> Option<SurrogateFit> {
    let d = window.dimension();
    let (newest, f_newest) = window.newest()?;
    let anchor = &cache.anchor;

    // Anchored system: rows (x̂_i − anchor, 1), targets f_i − f_t.
    let mut rhs = DenseVector::zeros(d + 1);
    let mut col_sq = DenseVector::zeros(d + 1);
    let mut y_sq = 0.0;
    for (p, &v) in window.points().zip(window.values()) {
        let dy = v - f_newest;
        for j in 0..d {
            let a = p[j] - anchor[j];
            rhs[j] += a * dy;
            col_sq[j] += a * a;
        }
        rhs[d] += dy;
        col_sq[d] += 1.0;
        y_sq += dy * dy;
    }
    let mut coeffs = &cache.inverse * rhs;

    // Refinement against the normal-equation defect X̂ᵀr, which vanishes for
    // an exact least-squares solution.
    let mut defect = DenseVector::zeros(d + 1);
    let mut residual_sq = 0.0;
    for pass in 0..=REFINEMENT_PASSES {
        if !coeffs.iter().all(|c| c.is_finite()) {
            return None;
        }
        defect.fill(0.0);
        residual_sq = 0.0;
        for (p, &v) in window.points().zip(window.values()) {
            let mut r = coeffs[d] - (v - f_newest);
            for j in 0..d {
                r += coeffs[j] * (p[j] - anchor[j]);
            }
            residual_sq += r * r;
            for j in 0..d {
                defect[j] += (p[j] - anchor[j]) * r;
            }
            defect[d] += r;
        }
        if pass < REFINEMENT_PASSES {
            coeffs -= &cache.inverse * &defect;
        }
    }
    let y_norm = y_sq.sqrt();
    let consistent = (0..=d).all(|j| defect[j].abs() <= CACHE_DEFECT_TOL * col_sq[j].sqrt() * y_norm);
    if !consistent {
        return None;
    }

    let g = coeffs.rows(0, d).into_owned();
    // Intercept of the anchored model, moved to the requested mode. Residuals
    // are unchanged by the reparametrisation.
    let c = match mode {
        LinearMode::InterceptCentered => coeffs[d] + g.dot(&(newest - anchor)),
        LinearMode::InterceptRaw => coeffs[d] + f_newest - g.dot(anchor),
        LinearMode::DifferenceNoIntercept => unreachable!(),
    };
    Some(SurrogateFit {
        g,
        h: None,
        c: Some(c),
        residual_norm: residual_sq.sqrt(),
        solver_path: SolverPath::CachedRank1,
    })
}

pub fn fit_quadratic(window: &EvaluationWindow) -> Result<SurrogateFit> {
    let (x, y) = assemble_quadratic_system(window)?;
    let sol = solve_least_squares(&x, &y)?;
    let d = window.dimension();
    Ok(SurrogateFit {
        g: sol.coeffs.rows(0, d).into_owned(),
        h: Some(sol.coeffs.rows(d, d).into_owned()),
        c: Some(sol.coeffs[2 * d]),
        residual_norm: sol.residual_norm,
        solver_path: SolverPath::Pseudoinverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn window_1d(xs: &[f64], f: impl Fn(f64) -> f64) -> EvaluationWindow {
        let mut w = EvaluationWindow::new(xs.len(), 1).unwrap();
        for &x in xs {
            w.push(DenseVector::from_element(1, x), f(x)).unwrap();
        }
        w
    }

    #[test]
    fn linear_systems_for_three_points() {
        let w = window_1d(&[0.0, 1.0, 2.0], |x| x);

        let (x, y) = assemble_linear_system(&w, LinearMode::InterceptCentered).unwrap();
        assert_eq!(x, DenseMatrix::from_row_slice(3, 2, &[0.0, 1.0, -1.0, 1.0, -2.0, 1.0]));
        assert_eq!(y.as_slice(), &[0.0, -1.0, -2.0]);

        let (x, y) = assemble_linear_system(&w, LinearMode::DifferenceNoIntercept).unwrap();
        assert_eq!(x, DenseMatrix::from_row_slice(2, 1, &[-1.0, -2.0]));
        assert_eq!(y.as_slice(), &[-1.0, -2.0]);

        let (x, y) = assemble_linear_system(&w, LinearMode::InterceptRaw).unwrap();
        assert_eq!(x, DenseMatrix::from_row_slice(3, 2, &[2.0, 1.0, 1.0, 1.0, 0.0, 1.0]));
        assert_eq!(y.as_slice(), &[2.0, 1.0, 0.0]);
    }

    #[test]
    fn underfilled_window_rejected() {
        let w = window_1d(&[1.0], |x| x);
        let err = assemble_linear_system(&w, LinearMode::InterceptRaw).unwrap_err();
        assert!(matches!(err, ZoError::NotEnoughSamples { have: 1, need: 2 }));
        assert!(fit_quadratic(&w).is_err());
    }

    #[test]
    fn quadratic_rows() {
        let w = window_1d(&[0.0, 2.0], |x| x);
        let (x, _) = assemble_quadratic_system(&w).unwrap();
        assert_eq!(x.row(1).iter().copied().collect::<Vec<_>>(), vec![-2.0, 2.0, 1.0]);

        let mut w = EvaluationWindow::new(2, 2).unwrap();
        w.push(DenseVector::from_vec(vec![1.0, -1.0]), 0.0).unwrap();
        w.push(DenseVector::zeros(2), 0.0).unwrap();
        let (x, _) = assemble_quadratic_system(&w).unwrap();
        assert_eq!(
            x.row(1).iter().copied().collect::<Vec<_>>(),
            vec![1.0, -1.0, 0.5, 0.5, 1.0]
        );
    }

    #[test]
    fn quadratic_fit_recovers_taylor_coefficients() {
        let w = window_1d(&[-1.0, 0.5, 2.0, 3.0, 1.25], |x| 3.0 * x * x + x);
        let fit = fit_quadratic(&w).unwrap();
        assert_abs_diff_eq!(fit.g[0], 6.0 * 1.25 + 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(fit.h.unwrap()[0], 6.0, epsilon = 1e-8);
        assert!(fit.residual_norm <= 1e-7);
    }

    #[test]
    fn constant_window_fits_zero() {
        let w = window_1d(&[0.0, 1.0, 3.0], |_| 5.0);
        let fit = fit_quadratic(&w).unwrap();
        assert_eq!(fit.g[0], 0.0);
        assert_eq!(fit.h.unwrap()[0], 0.0);
        assert_eq!(fit.c, Some(0.0));
        assert_eq!(fit.residual_norm, 0.0);
    }

    #[test]
    fn underdetermined_fit_is_min_norm() {
        let mut w = EvaluationWindow::new(2, 2).unwrap();
        for p in [[0.0, 0.0], [1.0, 0.0]] {
            let v = DenseVector::from_column_slice(&p);
            let f = v[0] + v[1];
            w.push(v, f).unwrap();
        }
        let fit = fit_linear(&w, LinearMode::InterceptCentered, false).unwrap();
        assert_abs_diff_eq!(fit.g[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.g[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fast_path_used_when_cache_present() {
        let mut w = EvaluationWindow::with_inverse_cache(4, 2).unwrap();
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.5]];
        for p in pts {
            let v = DenseVector::from_column_slice(&p);
            let f = 2.0 * v[0] - 3.0 * v[1] + 7.0;
            w.push(v, f).unwrap();
        }
        let fit = fit_linear(&w, LinearMode::InterceptRaw, true).unwrap();
        assert_eq!(fit.solver_path, SolverPath::CachedRank1);
        assert_abs_diff_eq!(fit.g[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.g[1], -3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.c.unwrap(), 7.0, epsilon = 1e-10);
        let slow = fit_linear(&w, LinearMode::InterceptRaw, false).unwrap();
        assert_eq!(slow.solver_path, SolverPath::Pseudoinverse);
    }
}
