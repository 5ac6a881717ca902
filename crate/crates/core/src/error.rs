use thiserror::Error;

use crate::optimizers::RunTrace;

pub type Result<T, E = ZoError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ZoError {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("objective returned a non-finite value {value} at point {point:?}")]
    EvaluationFailed { value: f64, point: Vec<f64> },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("window holds {have} samples, at least {need} required")]
    NotEnoughSamples { have: usize, need: usize },

    #[error("rank-1 update denominator {denominator:e} is below the singularity threshold")]
    SingularUpdate { denominator: f64 },

    /// The run left the finite region. The partial trace is kept so callers can
    /// record where it happened.
    #[error("run diverged at iteration {iteration}")]
    Diverged { iteration: usize, trace: Box<RunTrace> },

    #[error("experiment failed: {0}")]
    ExperimentFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("export error: {0}")]
    Export(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ZoError {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        ZoError::Precondition(msg.into())
    }
}

impl From<csv::Error> for ZoError {
    fn from(e: csv::Error) -> Self {
        ZoError::Export(e.to_string())
    }
}
