//! Measured counterparts of the analysis quantities: gradient bias at the
//! iterate, the empirical `C_d` ratio, and finite-difference gradients.
//!
//! Everything here reads the objective through its uncounted oracle channel,
//! so a diagnosed run spends exactly the queries of an undiagnosed one.

use crate::error::{Result, ZoError};
use crate::harness::percentile;
use crate::linalg::{ensure_dim, DenseVector};
use crate::objective::BlackBoxObjective;
use crate::optimizers::{run_observed, Method, OptimizerConfig, Phase, RunTrace, StepObserver, StepView};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub iteration: usize,
    /// `‖ĝ_t − ∇f(x_t)‖` for the update vector `ĝ_t`.
    pub xi_norm: f64,
    /// `‖∇f(x_t)‖`.
    pub grad_norm: f64,
    /// Linear method, regression phase only, and only with a known
    /// smoothness constant.
    pub cd_ratio: Option<f64>,
    /// `max_i ‖x̂_{t−i} − x̂_t‖` over the window.
    pub window_spread: Option<f64>,
    /// Estimate of the Gram condition number, when requested.
    pub gram_condition: Option<f64>,
    /// Warm-start steps: whether `η̃‖ĝ_t‖ > 2η‖∇f(x_t)‖`.
    pub warm_step_violation: Option<bool>,
}

/// Default central-difference step, `1e-5 · (1 + ‖x‖∞)`.
pub fn default_fd_step(x: &DenseVector) -> f64 {
    1e-5 * (1.0 + x.amax())
}

/// Central differences `(f(x + h e_i) − f(x − h e_i)) / 2h`, using `2d`
/// uncounted evaluations.
pub fn finite_difference_gradient(f: &BlackBoxObjective, x: &DenseVector, h: f64) -> Result<DenseVector> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(ZoError::precondition(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    ensure_dim(x, f.dimension())?;
    let mut probe = x.clone();
    let mut grad = DenseVector::zeros(x.len());
    for i in 0..x.len() {
        let xi = x[i];
        probe[i] = xi + h;
        let plus = f.oracle_value(&probe);
        probe[i] = xi - h;
        let minus = f.oracle_value(&probe);
        probe[i] = xi;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(ZoError::Numeric(format!(
                "non-finite value while differencing coordinate {i}"
            )));
        }
        grad[i] = (plus - minus) / (2.0 * h);
    }
    Ok(grad)
}

/// Analytic gradient when the problem has one, central differences otherwise.
pub fn oracle_gradient(f: &BlackBoxObjective, x: &DenseVector) -> Result<DenseVector> {
    match f.analytic_gradient(x) {
        Some(g) => Ok(g),
        None => finite_difference_gradient(f, x, default_fd_step(x)),
    }
}

/// `‖g_t − ∇f(x̂_t)‖ / ((L/2) ‖x̂_oldest − x̂_t‖)`. `Ok(None)` when the
/// window has collapsed to a point.
pub fn cd_ratio(
    g: &DenseVector,
    grad_at_xhat: &DenseVector,
    smoothness: f64,
    xhat_t: &DenseVector,
    xhat_oldest: &DenseVector,
) -> Result<Option<f64>> {
    if !(smoothness > 0.0) {
        return Err(ZoError::precondition(format!(
            "smoothness constant must be positive, got {smoothness}"
        )));
    }
    let spread = (xhat_oldest - xhat_t).norm();
    if spread == 0.0 {
        return Ok(None);
    }
    Ok(Some((g - grad_at_xhat).norm() / (0.5 * smoothness * spread)))
}

/// Observer that fills a [`DiagnosticsRecord`] on every iteration.
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsTracker {
    /// Estimate the Gram condition number each regression step.
    pub condition_numbers: bool,
}

impl DiagnosticsTracker {
    fn record(&self, objective: &BlackBoxObjective, step: &StepView<'_>) -> Result<DiagnosticsRecord> {
        let grad = oracle_gradient(objective, step.iterate)?;
        let xi_norm = (step.update_direction - &grad).norm();
        let grad_norm = grad.norm();

        let mut cd = None;
        if let (Method::LReszo, Phase::Regression, Some(g), Some(window), Some(l)) = (
            step.method,
            step.phase,
            step.surrogate_slope,
            step.window,
            objective.smoothness(),
        ) {
            let (oldest, _) = window.oldest().expect("window is full in the regression phase");
            let grad_hat = oracle_gradient(objective, step.evaluated_point)?;
            cd = cd_ratio(g, &grad_hat, l, step.evaluated_point, oldest)?;
        }
        let regression = step.phase == Phase::Regression;
        let window_spread = step.window.filter(|_| regression).map(|w| w.spread());
        let gram_condition = step
            .window
            .filter(|_| regression && self.condition_numbers && step.method == Method::LReszo)
            .map(|w| w.gram_condition_estimate());
        let warm_step_violation = (step.phase == Phase::WarmStart).then(|| {
            let (warm_eta, eta) = step.step_sizes;
            warm_eta * step.update_direction.norm() > 2.0 * eta * grad_norm
        });
        Ok(DiagnosticsRecord {
            iteration: step.iteration,
            xi_norm,
            grad_norm,
            cd_ratio: cd,
            window_spread,
            gram_condition,
            warm_step_violation,
        })
    }
}

impl StepObserver for DiagnosticsTracker {
    fn observe(&mut self, objective: &BlackBoxObjective, step: &StepView<'_>) -> Option<DiagnosticsRecord> {
        self.record(objective, step)
            .ok()
            .filter(|r| r.xi_norm.is_finite() && r.grad_norm.is_finite())
    }
}

/// Run the configured method with a [`DiagnosticsTracker`] attached.
pub fn attach_diagnostics(
    objective: &mut BlackBoxObjective,
    cfg: &OptimizerConfig,
    x0: &DenseVector,
) -> Result<RunTrace> {
    run_observed(objective, cfg, x0, &mut DiagnosticsTracker::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdSummary {
    pub max: f64,
    pub p99: f64,
    pub mean: f64,
    pub count: usize,
    /// Iteration at which the maximum occurred.
    pub argmax: usize,
}

/// Max, 99th percentile and mean of the recorded `C_d` values.
pub fn summarize_cd(trace: &RunTrace) -> Option<CdSummary> {
    let pairs: Vec<(usize, f64)> = trace
        .records
        .iter()
        .filter_map(|r| r.diagnostics.as_ref()?.cd_ratio.map(|c| (r.iteration, c)))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    let (argmax, max) = pairs
        .iter()
        .copied()
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let mut values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    Some(CdSummary {
        max,
        p99: percentile(&values, 0.99),
        mean,
        count: values.len(),
        argmax,
    })
}

/// Fraction of regression-phase iterations with `‖ξ_t‖ ≤ ‖∇f(x_t)‖`.
pub fn bias_within_gradient_fraction(trace: &RunTrace, window_m: usize) -> Option<f64> {
    let flags: Vec<bool> = trace
        .records
        .iter()
        .filter(|r| r.iteration > window_m)
        .filter_map(|r| r.diagnostics.as_ref())
        .map(|d| d.xi_norm <= d.grad_norm)
        .collect();
    (!flags.is_empty()).then(|| flags.iter().filter(|&&b| b).count() as f64 / flags.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnProblem;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fd_exact_on_linear_and_quadratic() {
        let a = DenseVector::from_vec(vec![1.5, -0.25, 3.0]);
        let a2 = a.clone();
        let lin = BlackBoxObjective::from_problem(FnProblem::new("lin", 3, move |x| a2.dot(x)));
        let g = finite_difference_gradient(&lin, &DenseVector::from_vec(vec![0.2, 0.1, -0.4]), 1e-5).unwrap();
        assert!((&g - &a).amax() <= 1e-10);
        assert_eq!(lin.query_count(), 0);

        let quad = BlackBoxObjective::from_problem(FnProblem::new("sq", 2, |x| x.norm_squared()));
        let g = finite_difference_gradient(&quad, &DenseVector::from_vec(vec![1.0, 2.0]), 1e-5).unwrap();
        assert_abs_diff_eq!(g[0], 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!(g[1], 4.0, epsilon = 1e-8);
    }

    #[test]
    fn fd_rejects_bad_step() {
        let quad = BlackBoxObjective::from_problem(FnProblem::new("sq", 1, |x| x[0] * x[0]));
        assert!(finite_difference_gradient(&quad, &DenseVector::zeros(1), 0.0).is_err());
    }

    #[test]
    fn cd_ratio_arithmetic() {
        let g = DenseVector::from_vec(vec![1.0, 0.0]);
        let z = DenseVector::zeros(2);
        let old = DenseVector::from_vec(vec![0.0, 0.5]);
        assert_eq!(cd_ratio(&g, &z, 2.0, &z, &old).unwrap(), Some(2.0));
        assert_eq!(cd_ratio(&g, &g, 2.0, &z, &old).unwrap(), Some(0.0));
        assert_eq!(cd_ratio(&g, &z, 2.0, &z, &z).unwrap(), None);
        assert!(cd_ratio(&g, &z, 0.0, &z, &old).is_err());
    }
}
