//! Iteration drivers for the baselines and the regression-based methods.
//!
//! Query accounting, with `t` the number of iterations executed:
//!
//! | method            | queries |
//! |-------------------|---------|
//! | szo               | `t`     |
//! | rszo              | `t + 1` |
//! | tzo               | `2t`    |
//! | l_reszo, q_reszo  | `t + 1` |
//!
//! The extra query of the residual-feedback methods is the seed evaluation at
//! `x0` that the first difference is taken against.

mod baseline;
mod config;
mod reszo;
mod trace;

pub use baseline::run_baseline;
pub use config::{Method, OptimizerConfig};
pub use reszo::{run_l_reszo, run_q_reszo};
pub use trace::{IterationRecord, RunTrace};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::linalg::DenseVector;
use crate::objective::BlackBoxObjective;
use crate::regression::EvaluationWindow;

/// Iterates whose objective value exceeds this magnitude count as diverged.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// `max(η‖g_prev‖, delta_min)`.
pub fn adaptive_delta(eta: f64, g_prev: &DenseVector, delta_min: f64) -> f64 {
    (eta * g_prev.norm()).max(delta_min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Baseline,
    WarmStart,
    Regression,
}

/// Snapshot handed to an observer after the estimate of one iteration is
/// formed and before the iterate moves.
#[derive(Debug)]
pub struct StepView<'a> {
    pub method: Method,
    pub phase: Phase,
    /// One-based count of executed iterations, this one included.
    pub iteration: usize,
    /// `x_t`.
    pub iterate: &'a DenseVector,
    /// The point queried this iteration.
    pub evaluated_point: &'a DenseVector,
    /// Vector the update subtracts after scaling by the step size.
    pub update_direction: &'a DenseVector,
    /// Slope of the fitted surrogate at the newest point, regression phase
    /// only.
    pub surrogate_slope: Option<&'a DenseVector>,
    pub window: Option<&'a EvaluationWindow>,
    /// Step sizes in effect: (warm start, main).
    pub step_sizes: (f64, f64),
}

/// Per-iteration hook. Observers read the objective only through its
/// uncounted oracle methods.
pub trait StepObserver {
    fn observe(&mut self, objective: &BlackBoxObjective, step: &StepView<'_>) -> Option<DiagnosticsRecord>;
}

/// Observer that records nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoDiagnostics;

impl StepObserver for NoDiagnostics {
    fn observe(&mut self, _: &BlackBoxObjective, _: &StepView<'_>) -> Option<DiagnosticsRecord> {
        None
    }
}

/// Run the configured method.
pub fn run(objective: &mut BlackBoxObjective, cfg: &OptimizerConfig, x0: &DenseVector) -> Result<RunTrace> {
    run_observed(objective, cfg, x0, &mut NoDiagnostics)
}

pub fn run_observed(
    objective: &mut BlackBoxObjective,
    cfg: &OptimizerConfig,
    x0: &DenseVector,
    observer: &mut dyn StepObserver,
) -> Result<RunTrace> {
    match cfg.method {
        Method::Szo | Method::Rszo | Method::Tzo => baseline::run_baseline_observed(objective, cfg, x0, observer),
        Method::LReszo | Method::QReszo => reszo::run_reszo_observed(objective, cfg, x0, observer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_delta_formula() {
        let g = DenseVector::from_vec(vec![0.0, 2.0]);
        assert!((adaptive_delta(1e-3, &g, 0.0) - 2e-3).abs() < 1e-18);
        assert_eq!(adaptive_delta(1e-3, &DenseVector::zeros(2), 1e-8), 1e-8);
    }
}
