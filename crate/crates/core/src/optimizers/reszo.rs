use super::trace::TraceBuilder;
use super::{
    adaptive_delta, IterationRecord, Method, NoDiagnostics, OptimizerConfig, Phase, RunTrace, StepObserver, StepView,
};
use crate::error::{Result, ZoError};
use crate::estimators::rszo_estimate_scaled;
use crate::linalg::{ensure_dim, ensure_finite, DenseVector};
use crate::objective::BlackBoxObjective;
use crate::regression::{fit_linear, fit_quadratic, EvaluationWindow, SolverPath};
use crate::rng::SeededRng;

/// Linear regression-based single-point method.
///
/// The first `window_m` iterations run the residual-feedback estimator with
/// `(warm_eta, warm_delta)` and fill the window with every queried point.
/// Each later iteration queries `x̂_t = x_t + δ_t u_t`, fits a linear
/// surrogate to the window and steps `x_{t+1} = x_t − η g_t`.
pub fn run_l_reszo(objective: &mut BlackBoxObjective, cfg: &OptimizerConfig, x0: &DenseVector) -> Result<RunTrace> {
    if cfg.method != Method::LReszo {
        return Err(ZoError::precondition(format!("expected l_reszo, got {}", cfg.method)));
    }
    run_reszo_observed(objective, cfg, x0, &mut NoDiagnostics)
}

/// Quadratic variant: fits `(g, h, c)` with a diagonal curvature term and
/// steps along the surrogate gradient at the unperturbed iterate,
/// `x_{t+1} = x_t − η (g_t − δ_t h_t ⊙ u_t)`.
pub fn run_q_reszo(objective: &mut BlackBoxObjective, cfg: &OptimizerConfig, x0: &DenseVector) -> Result<RunTrace> {
    if cfg.method != Method::QReszo {
        return Err(ZoError::precondition(format!("expected q_reszo, got {}", cfg.method)));
    }
    run_reszo_observed(objective, cfg, x0, &mut NoDiagnostics)
}

pub(super) fn run_reszo_observed(
    objective: &mut BlackBoxObjective,
    cfg: &OptimizerConfig,
    x0: &DenseVector,
    observer: &mut dyn StepObserver,
) -> Result<RunTrace> {
    if !cfg.method.is_regression() {
        return Err(ZoError::precondition(format!(
            "{} is not a regression method",
            cfg.method
        )));
    }
    cfg.validate()?;
    let d = objective.dimension();
    ensure_dim(x0, d)?;
    ensure_finite(x0, "initial point")?;

    let m = cfg.window_m;
    let use_cache = cfg.fast_path && cfg.method == Method::LReszo;
    let mut window = if use_cache {
        EvaluationWindow::with_inverse_cache(m, d)?
    } else {
        EvaluationWindow::new(m, d)?
    };
    let mut rng = SeededRng::new(cfg.seed);
    let factor = cfg.direction_factor(d);
    let start_queries = objective.query_count();
    let mut tb = TraceBuilder::new(cfg, objective, 1, x0);
    let mut x = x0.clone();
    let mut prev_value = objective.evaluate(&x).map_err(|e| tb.fail(e))?;

    for t in 1..=m {
        let u = cfg.direction_distribution.sample(&mut rng, d)?;
        let outcome =
            rszo_estimate_scaled(objective, &x, &u, cfg.warm_delta, prev_value, factor).map_err(|e| tb.fail(e))?;
        prev_value = outcome.last_value;
        let x_hat = &x + &u * cfg.warm_delta;
        window.push(x_hat.clone(), outcome.last_value)?;
        let g = outcome.gradient_estimate;

        let diagnostics = observer.observe(
            objective,
            &StepView {
                method: cfg.method,
                phase: Phase::WarmStart,
                iteration: t,
                iterate: &x,
                evaluated_point: &x_hat,
                update_direction: &g,
                surrogate_slope: None,
                window: Some(&window),
                step_sizes: (cfg.warm_eta, cfg.eta),
            },
        );
        x.axpy(-cfg.warm_eta, &g, 1.0);
        let record = IterationRecord {
            iteration: t,
            queries: objective.query_count() - start_queries,
            f_value: outcome.last_value,
            iterate_value: f64::NAN,
            grad_est_norm: g.norm(),
            delta: cfg.warm_delta,
            solver_path: None,
            diagnostics,
        };
        tb.push(record, objective, &x)?;
    }

    let delta_min = cfg.effective_delta_min();
    let mut delta_t = cfg.delta;
    let mut last_estimate: Option<DenseVector> = None;
    for t in (m + 1)..=cfg.iterations {
        if cfg.adaptive_delta {
            if let Some(g_prev) = &last_estimate {
                delta_t = adaptive_delta(cfg.eta, g_prev, delta_min);
            }
        }
        let u = cfg.direction_distribution.sample(&mut rng, d)?;
        let x_hat = &x + &u * delta_t;
        let value = objective.evaluate(&x_hat).map_err(|e| tb.fail(e))?;
        window.push(x_hat.clone(), value)?;

        let fit = match cfg.method {
            Method::LReszo => fit_linear(&window, cfg.regression_mode, cfg.fast_path)?,
            _ => fit_quadratic(&window)?,
        };
        if use_cache && fit.solver_path == SolverPath::Pseudoinverse {
            tb.note_fallback();
            window.refresh_inverse();
        }
        let direction = match &fit.h {
            Some(h) => &fit.g - (h.component_mul(&u) * delta_t),
            None => fit.g.clone(),
        };

        let diagnostics = observer.observe(
            objective,
            &StepView {
                method: cfg.method,
                phase: Phase::Regression,
                iteration: t,
                iterate: &x,
                evaluated_point: &x_hat,
                update_direction: &direction,
                surrogate_slope: Some(&fit.g),
                window: Some(&window),
                step_sizes: (cfg.warm_eta, cfg.eta),
            },
        );
        x.axpy(-cfg.eta, &direction, 1.0);
        let record = IterationRecord {
            iteration: t,
            queries: objective.query_count() - start_queries,
            f_value: value,
            iterate_value: f64::NAN,
            grad_est_norm: direction.norm(),
            delta: delta_t,
            solver_path: Some(fit.solver_path),
            diagnostics,
        };
        tb.push(record, objective, &x)?;
        last_estimate = Some(direction);
    }
    Ok(tb.finish())
}
