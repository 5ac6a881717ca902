//! Single-point zeroth-order optimization with regression-based gradient
//! surrogates.
//!
//! The library provides the classic one- and two-point estimators (SZO,
//! RSZO, TZO), the regression methods L-RESZO and Q-RESZO that reuse a
//! sliding window of past evaluations, synthetic benchmarks, per-iteration
//! diagnostics and a reproducible multi-trial harness.
//!
//! ```
//! use reszo::benchmarks::BenchmarkSpec;
//! use reszo::harness::{run_experiment, ExperimentConfig};
//! use reszo::optimizers::{Method, OptimizerConfig};
//!
//! let mut bench = BenchmarkSpec::ridge(5);
//! bench.n_samples = Some(50);
//! let mut opt = OptimizerConfig::new(Method::LReszo, 1e-4, 0.01, 100);
//! opt.window_m = 10;
//! opt.warm_eta = 1e-4;
//! opt.warm_delta = 0.05;
//! let result = run_experiment(&ExperimentConfig::new(bench, opt, 2)).unwrap();
//! assert!(result.curve.final_mean() < result.curve.mean_gap[0]);
//! ```

// Negated comparisons such as `!(x > 0.0)` are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod linalg;
pub mod objective;
pub mod optimizers;
pub mod regression;
pub mod rng;
pub mod sampling;

pub use error::{Result, ZoError};
pub use objective::{BlackBoxObjective, FnProblem, Problem};
pub use optimizers::{run, Method, OptimizerConfig, RunTrace};
