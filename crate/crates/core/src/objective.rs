//! Black-box objectives with exact query accounting.
//!
//! A [`Problem`] is the mathematical function. A [`BlackBoxObjective`] wraps a
//! shared problem together with a query counter; every call to
//! [`BlackBoxObjective::evaluate`] costs one query. Diagnostics that need
//! function values or gradients without consuming the budget go through the
//! separate, non-counting oracle methods.

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, ZoError};
use crate::linalg::{ensure_dim, DenseVector};

pub trait Problem: Send + Sync {
    fn dimension(&self) -> usize;

    fn value(&self, x: &DenseVector) -> f64;

    fn gradient(&self, _x: &DenseVector) -> Option<DenseVector> {
        None
    }

    /// Lipschitz constant of the gradient, when known.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// Minimum value f*, when known.
    fn optimum_value(&self) -> Option<f64> {
        None
    }

    fn name(&self) -> &str;
}

type ValueFn = dyn Fn(&DenseVector) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DenseVector) -> DenseVector + Send + Sync;

/// A [`Problem`] built from closures. Handy for tests and ad-hoc objectives.
pub struct FnProblem {
    name: String,
    dim: usize,
    value: Box<ValueFn>,
    gradient: Option<Box<GradFn>>,
    smoothness: Option<f64>,
    optimum: Option<f64>,
}

impl FnProblem {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&DenseVector) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            value: Box::new(value),
            gradient: None,
            smoothness: None,
            optimum: None,
        }
    }

    pub fn with_gradient(mut self, grad: impl Fn(&DenseVector) -> DenseVector + Send + Sync + 'static) -> Self {
        self.gradient = Some(Box::new(grad));
        self
    }

    pub fn with_smoothness(mut self, l: f64) -> Self {
        self.smoothness = Some(l);
        self
    }

    pub fn with_optimum(mut self, f_star: f64) -> Self {
        self.optimum = Some(f_star);
        self
    }
}

impl Problem for FnProblem {
    fn dimension(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &DenseVector) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &DenseVector) -> Option<DenseVector> {
        self.gradient.as_ref().map(|g| g(x))
    }
    fn smoothness(&self) -> Option<f64> {
        self.smoothness
    }
    fn optimum_value(&self) -> Option<f64> {
        self.optimum
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// Single-owner evaluator: shares the read-only problem, owns its counter.
#[derive(Clone)]
pub struct BlackBoxObjective {
    problem: Arc<dyn Problem>,
    queries: u64,
}

impl fmt::Debug for BlackBoxObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxObjective")
            .field("problem", &self.problem.name())
            .field("dimension", &self.problem.dimension())
            .field("queries", &self.queries)
            .finish()
    }
}

impl BlackBoxObjective {
    pub fn new(problem: Arc<dyn Problem>) -> Self {
        Self { problem, queries: 0 }
    }

    pub fn from_problem(problem: impl Problem + 'static) -> Self {
        Self::new(Arc::new(problem))
    }

    /// Another evaluator over the same problem with a zeroed counter.
    pub fn fresh(&self) -> Self {
        Self::new(Arc::clone(&self.problem))
    }

    pub fn dimension(&self) -> usize {
        self.problem.dimension()
    }

    pub fn query_count(&self) -> u64 {
        self.queries
    }

    pub fn problem(&self) -> &Arc<dyn Problem> {
        &self.problem
    }

    /// One black-box query. The counter advances whenever the function is
    /// actually called, including when it returns a non-finite value.
    pub fn evaluate(&mut self, x: &DenseVector) -> Result<f64> {
        ensure_dim(x, self.dimension())?;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(ZoError::precondition("evaluation point has non-finite entries"));
        }
        self.queries += 1;
        let value = self.problem.value(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ZoError::EvaluationFailed {
                value,
                point: x.iter().copied().collect(),
            })
        }
    }

    /// Uncounted evaluation, reserved for diagnostics and reporting.
    pub fn oracle_value(&self, x: &DenseVector) -> f64 {
        self.problem.value(x)
    }

    /// Uncounted analytic gradient, if the problem provides one.
    pub fn analytic_gradient(&self, x: &DenseVector) -> Option<DenseVector> {
        self.problem.gradient(x)
    }

    pub fn smoothness(&self) -> Option<f64> {
        self.problem.smoothness()
    }

    pub fn optimum_value(&self) -> Option<f64> {
        self.problem.optimum_value()
    }
}
