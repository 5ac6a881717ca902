//! The four test problems: ridge regression, logistic regression, the
//! shifted Rosenbrock function and a small teacher-student network.
//!
//! Data are a pure function of the spec: every random draw comes from one
//! [`SeededRng`] stream keyed by `spec.seed`.

mod dataset;
mod logistic;
mod neural_net;
mod ridge;
mod rosenbrock;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dataset::{load_dataset, save_dataset, Dataset};
pub use logistic::LogisticProblem;
pub use neural_net::{NetworkLayout, NeuralNetProblem};
pub use ridge::RidgeProblem;
pub use rosenbrock::RosenbrockProblem;

use crate::error::{Result, ZoError};
use crate::linalg::DenseVector;
use crate::objective::{BlackBoxObjective, Problem};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Ridge,
    Logistic,
    Rosenbrock,
    NeuralNet,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Ridge => "ridge",
            ProblemKind::Logistic => "logistic",
            ProblemKind::Rosenbrock => "rosenbrock",
            ProblemKind::NeuralNet => "neural_net",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            ProblemKind::Ridge | ProblemKind::Logistic => 1000,
            ProblemKind::NeuralNet => 500,
            ProblemKind::Rosenbrock => 0,
        }
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = ZoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ridge" => Ok(ProblemKind::Ridge),
            "logistic" => Ok(ProblemKind::Logistic),
            "rosenbrock" => Ok(ProblemKind::Rosenbrock),
            "neural_net" | "nn" => Ok(ProblemKind::NeuralNet),
            _ => Err(ZoError::Config(format!("unknown problem '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSpec {
    pub problem: ProblemKind,
    /// Problem dimension. For the network this must equal `3n² + 4n`.
    pub d: usize,
    /// Sample count; defaults to 1000 (regressions) or 500 (network).
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_lambda() -> f64 {
    0.1
}

impl BenchmarkSpec {
    pub fn new(problem: ProblemKind, d: usize) -> Self {
        Self {
            problem,
            d,
            n_samples: None,
            lambda: default_lambda(),
            seed: 0,
        }
    }

    pub fn ridge(d: usize) -> Self {
        Self::new(ProblemKind::Ridge, d)
    }

    pub fn logistic(d: usize) -> Self {
        Self::new(ProblemKind::Logistic, d)
    }

    pub fn rosenbrock(d: usize) -> Self {
        Self::new(ProblemKind::Rosenbrock, d)
    }

    /// Network with hidden width `n`, so `d = 3n² + 4n`.
    pub fn neural_net(width: usize) -> Self {
        Self::new(ProblemKind::NeuralNet, NetworkLayout::new(width).dimension())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn samples(&self) -> usize {
        self.n_samples.unwrap_or_else(|| self.problem.default_samples())
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(ZoError::Config("benchmark dimension must be at least 1".into()));
        }
        if self.problem != ProblemKind::Rosenbrock && self.samples() < 1 {
            return Err(ZoError::Config("sample count must be at least 1".into()));
        }
        if self.problem == ProblemKind::Rosenbrock && self.d < 2 {
            return Err(ZoError::Config("rosenbrock needs d >= 2".into()));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(ZoError::Config(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        if self.problem == ProblemKind::NeuralNet {
            NetworkLayout::from_dimension(self.d)?;
        }
        Ok(())
    }

    pub(crate) fn rng(&self) -> SeededRng {
        SeededRng::new(self.seed)
    }
}

/// A constructed benchmark: the objective together with its prescribed
/// starting point.
#[derive(Clone)]
pub struct Benchmark {
    pub spec: BenchmarkSpec,
    pub problem: Arc<dyn Problem>,
    pub x0: DenseVector,
}

impl std::fmt::Debug for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Benchmark")
            .field("spec", &self.spec)
            .finish_non_exhaustive()
    }
}

impl Benchmark {
    pub fn build(spec: &BenchmarkSpec) -> Result<Self> {
        spec.validate()?;
        let (problem, x0): (Arc<dyn Problem>, DenseVector) = match spec.problem {
            ProblemKind::Ridge => (Arc::new(RidgeProblem::generate(spec)?), DenseVector::zeros(spec.d)),
            ProblemKind::Logistic => (Arc::new(LogisticProblem::generate(spec)?), DenseVector::zeros(spec.d)),
            ProblemKind::Rosenbrock => (
                Arc::new(RosenbrockProblem::new(spec.d)),
                DenseVector::from_element(spec.d, 0.5),
            ),
            ProblemKind::NeuralNet => {
                let p = NeuralNetProblem::generate(spec)?;
                let x0 = p.initial_point().clone();
                (Arc::new(p), x0)
            }
        };
        Ok(Self {
            spec: spec.clone(),
            problem,
            x0,
        })
    }

    pub fn objective(&self) -> BlackBoxObjective {
        BlackBoxObjective::new(Arc::clone(&self.problem))
    }

    /// `f(x) − f*`, through the uncounted channel.
    pub fn gap(&self, value: f64) -> f64 {
        value - self.problem.optimum_value().unwrap_or(0.0)
    }
}

pub fn make_ridge(spec: &BenchmarkSpec) -> Result<BlackBoxObjective> {
    expect_kind(spec, ProblemKind::Ridge)?;
    Ok(BlackBoxObjective::from_problem(RidgeProblem::generate(spec)?))
}

pub fn make_logistic(spec: &BenchmarkSpec) -> Result<BlackBoxObjective> {
    expect_kind(spec, ProblemKind::Logistic)?;
    Ok(BlackBoxObjective::from_problem(LogisticProblem::generate(spec)?))
}

pub fn make_rosenbrock(spec: &BenchmarkSpec) -> Result<BlackBoxObjective> {
    expect_kind(spec, ProblemKind::Rosenbrock)?;
    Ok(BlackBoxObjective::from_problem(RosenbrockProblem::new(spec.d)))
}

pub fn make_neural_net(spec: &BenchmarkSpec) -> Result<BlackBoxObjective> {
    expect_kind(spec, ProblemKind::NeuralNet)?;
    Ok(BlackBoxObjective::from_problem(NeuralNetProblem::generate(spec)?))
}

fn expect_kind(spec: &BenchmarkSpec, kind: ProblemKind) -> Result<()> {
    if spec.problem != kind {
        return Err(ZoError::precondition(format!(
            "expected a {} spec, got {}",
            kind.name(),
            spec.problem.name()
        )));
    }
    spec.validate()
}
