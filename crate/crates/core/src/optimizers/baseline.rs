use super::trace::TraceBuilder;
use super::{IterationRecord, RunTrace};
use super::{Method, NoDiagnostics, OptimizerConfig, Phase, StepObserver, StepView};
use crate::error::{Result, ZoError};
use crate::estimators::{rszo_estimate_scaled, szo_estimate_scaled, tzo_estimate_scaled};
use crate::linalg::{ensure_dim, ensure_finite, DenseVector};
use crate::objective::BlackBoxObjective;
use crate::rng::SeededRng;

/// Run one of the single- or two-point baselines for `cfg.iterations`
/// iterations with `x_{t+1} = x_t − η · estimate`.
pub fn run_baseline(objective: &mut BlackBoxObjective, cfg: &OptimizerConfig, x0: &DenseVector) -> Result<RunTrace> {
    run_baseline_observed(objective, cfg, x0, &mut NoDiagnostics)
}

pub(super) fn run_baseline_observed(
    objective: &mut BlackBoxObjective,
    cfg: &OptimizerConfig,
    x0: &DenseVector,
    observer: &mut dyn StepObserver,
) -> Result<RunTrace> {
    if cfg.method.is_regression() {
        return Err(ZoError::precondition(format!(
            "{} is not a baseline method",
            cfg.method
        )));
    }
    cfg.validate()?;
    let d = objective.dimension();
    ensure_dim(x0, d)?;
    ensure_finite(x0, "initial point")?;

    let mut rng = SeededRng::new(cfg.seed);
    let factor = cfg.direction_factor(d);
    let start_queries = objective.query_count();
    let mut x = x0.clone();

    let mut prev_value = 0.0;
    let seed_queries = if cfg.method == Method::Rszo { 1 } else { 0 };
    let mut tb = TraceBuilder::new(cfg, objective, seed_queries, x0);
    if cfg.method == Method::Rszo {
        prev_value = objective.evaluate(&x).map_err(|e| tb.fail(e))?;
    }

    for t in 1..=cfg.iterations {
        let u = cfg.direction_distribution.sample(&mut rng, d)?;
        let outcome = match cfg.method {
            Method::Szo => szo_estimate_scaled(objective, &x, &u, cfg.delta, factor),
            Method::Rszo => rszo_estimate_scaled(objective, &x, &u, cfg.delta, prev_value, factor),
            Method::Tzo => tzo_estimate_scaled(objective, &x, &u, cfg.delta, factor),
            _ => unreachable!(),
        }
        .map_err(|e| tb.fail(e))?;
        prev_value = outcome.last_value;
        // Report the forward evaluation, which all three share.
        let f_value = outcome.forward_value;
        let g = outcome.gradient_estimate;

        let x_hat = &x + &u * cfg.delta;
        let diagnostics = observer.observe(
            objective,
            &StepView {
                method: cfg.method,
                phase: Phase::Baseline,
                iteration: t,
                iterate: &x,
                evaluated_point: &x_hat,
                update_direction: &g,
                surrogate_slope: None,
                window: None,
                step_sizes: (cfg.eta, cfg.eta),
            },
        );

        x.axpy(-cfg.eta, &g, 1.0);
        let record = IterationRecord {
            iteration: t,
            queries: objective.query_count() - start_queries,
            f_value,
            iterate_value: f64::NAN,
            grad_est_norm: g.norm(),
            delta: cfg.delta,
            solver_path: None,
            diagnostics,
        };
        tb.push(record, objective, &x)?;
    }
    Ok(tb.finish())
}
