use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Result, ZoError};
use crate::linalg::DenseVector;
use crate::objective::BlackBoxObjective;
use crate::regression::SolverPath;

use super::{Method, OptimizerConfig, DIVERGENCE_THRESHOLD};

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// One-based count of executed iterations.
    pub iteration: usize,
    /// Cumulative black-box queries after this iteration.
    pub queries: u64,
    /// `f(x_t + δ_t u_t)`, the forward query of this iteration.
    pub f_value: f64,
    /// `f(x_{t+1})` from the uncounted oracle channel; NaN when iterate
    /// values are not recorded.
    pub iterate_value: f64,
    /// Norm of the vector the update subtracted (before scaling by η).
    pub grad_est_norm: f64,
    /// Smoothing radius used this iteration.
    pub delta: f64,
    pub solver_path: Option<SolverPath>,
    pub diagnostics: Option<DiagnosticsRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub method: Method,
    pub seed: u64,
    /// `f(x0)` from the oracle channel; NaN when iterate values are not
    /// recorded.
    pub initial_value: f64,
    /// Queries spent before the first iteration (the residual-feedback seed).
    pub initial_queries: u64,
    pub records: Vec<IterationRecord>,
    pub final_iterate: DenseVector,
    pub diverged: bool,
    /// Regression steps that fell back from the cached inverse to the full
    /// solve.
    pub fast_path_fallbacks: u64,
}

impl RunTrace {
    pub fn total_queries(&self) -> u64 {
        self.records.last().map_or(self.initial_queries, |r| r.queries)
    }

    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Pairs `(queries, f(iterate))`, starting with the initial point.
    pub fn value_curve(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        std::iter::once((self.initial_queries, self.initial_value))
            .chain(self.records.iter().map(|r| (r.queries, r.iterate_value)))
    }

    pub fn has_diagnostics(&self) -> bool {
        self.records.iter().any(|r| r.diagnostics.is_some())
    }
}

/// Accumulates records and applies the divergence rule.
pub(super) struct TraceBuilder {
    trace: RunTrace,
    record_values: bool,
}

impl TraceBuilder {
    pub(super) fn new(
        cfg: &OptimizerConfig,
        objective: &BlackBoxObjective,
        initial_queries: u64,
        x0: &DenseVector,
    ) -> Self {
        let record_values = cfg.record_iterate_values;
        Self {
            record_values,
            trace: RunTrace {
                method: cfg.method,
                seed: cfg.seed,
                initial_value: if record_values {
                    objective.oracle_value(x0)
                } else {
                    f64::NAN
                },
                initial_queries,
                records: Vec::new(),
                final_iterate: x0.clone(),
                diverged: false,
                fast_path_fallbacks: 0,
            },
        }
    }

    pub(super) fn note_fallback(&mut self) {
        self.trace.fast_path_fallbacks += 1;
    }

    /// Divergence error carrying the trace so far. Evaluation failures are
    /// divergence; every other error passes through unchanged.
    pub(super) fn fail(&self, err: ZoError) -> ZoError {
        match err {
            ZoError::EvaluationFailed { .. } => self.diverged_error(),
            other => other,
        }
    }

    fn diverged_error(&self) -> ZoError {
        let mut trace = self.trace.clone();
        trace.diverged = true;
        ZoError::Diverged {
            iteration: trace.records.len() + 1,
            trace: Box::new(trace),
        }
    }

    /// Append a record and move the final iterate. Returns a divergence
    /// error when the new iterate or the queried value leaves the finite
    /// region.
    pub(super) fn push(
        &mut self,
        mut record: IterationRecord,
        objective: &BlackBoxObjective,
        next: &DenseVector,
    ) -> Result<()> {
        let finite_iterate = next.iter().all(|v| v.is_finite());
        record.iterate_value = if finite_iterate && self.record_values {
            objective.oracle_value(next)
        } else {
            f64::NAN
        };
        let value_ok = !self.record_values
            || (record.iterate_value.is_finite() && record.iterate_value.abs() <= DIVERGENCE_THRESHOLD);
        let ok = finite_iterate && record.f_value.abs() <= DIVERGENCE_THRESHOLD && value_ok;
        self.trace.final_iterate.copy_from(next);
        self.trace.records.push(record);
        if ok {
            Ok(())
        } else {
            let mut trace = self.trace.clone();
            trace.diverged = true;
            Err(ZoError::Diverged {
                iteration: trace.records.len(),
                trace: Box::new(trace),
            })
        }
    }

    pub(super) fn finish(self) -> RunTrace {
        self.trace
    }
}
