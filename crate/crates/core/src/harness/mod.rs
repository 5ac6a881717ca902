//! Multi-trial experiments, aggregation, grid search and export.

mod export;
mod grid;
mod stats;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use export::{
    export_merged_curves, export_results, read_curve_csv, read_manifest, CurveColumns, Manifest, ProvenanceInfo,
    CURVE_FILE, MANIFEST_FILE, TRIALS_FILE,
};
pub use grid::{grid_search, GridCell, GridResult};
pub use stats::{aggregate_trials, gap_curve, percentile, AggregateCurve};

use crate::benchmarks::{load_dataset, Benchmark, BenchmarkSpec};
use crate::diagnostics::DiagnosticsTracker;
use crate::error::{Result, ZoError};
use crate::optimizers::{run_observed, NoDiagnostics, OptimizerConfig, RunTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub benchmark: BenchmarkSpec,
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Trial `k` runs with direction seed `base_seed + k`.
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub record_diagnostics: bool,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub workers: Option<usize>,
    /// Keep every `stride`-th exported row (the last row is always kept).
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Optional dataset file to load instead of generating the data.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
}

fn default_trials() -> usize {
    1
}
fn default_confidence() -> f64 {
    0.8
}
fn default_stride() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(benchmark: BenchmarkSpec, optimizer: OptimizerConfig, trials: usize) -> Self {
        Self {
            benchmark,
            optimizer,
            trials,
            base_seed: 0,
            confidence: default_confidence(),
            record_diagnostics: false,
            output_path: None,
            workers: None,
            stride: default_stride(),
            dataset: None,
        }
    }

    /// Parse a TOML experiment file. Run manifests are accepted too, so a
    /// manifest can be fed back to reproduce its run.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        if let Ok(manifest) = toml::from_str::<Manifest>(text) {
            return Ok(manifest.experiment);
        }
        toml::from_str(text).map_err(|e| ZoError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ZoError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ZoError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(ZoError::Config("trials must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(ZoError::Config(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        if self.stride < 1 {
            return Err(ZoError::Config("stride must be at least 1".into()));
        }
        if !self.optimizer.record_iterate_values {
            return Err(ZoError::Config(
                "experiments need record_iterate_values for the gap curves".into(),
            ));
        }
        if self.workers == Some(0) {
            return Err(ZoError::Config("workers must be at least 1".into()));
        }
        self.benchmark.validate()?;
        self.optimizer.validate()
    }

    pub fn build_benchmark(&self) -> Result<Benchmark> {
        match &self.dataset {
            Some(path) => load_dataset(path)?.into_benchmark(&self.benchmark),
            None => Benchmark::build(&self.benchmark),
        }
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.base_seed.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// All trials in index order, diverged ones included (flagged).
    pub traces: Vec<RunTrace>,
    pub curve: AggregateCurve,
    /// `f*` used for the gaps.
    pub optimum: f64,
}

/// Run every trial of `cfg` (in parallel up to `cfg.workers`) and aggregate
/// the optimality-gap curves.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let bench = cfg.build_benchmark()?;
    run_experiment_on(cfg, &bench)
}

/// As [`run_experiment`], on an already constructed benchmark.
pub fn run_experiment_on(cfg: &ExperimentConfig, bench: &Benchmark) -> Result<ExperimentResult> {
    cfg.validate()?;
    let run_trial = |k: usize| -> Result<RunTrace> {
        let mut opt = cfg.optimizer.clone();
        opt.seed = cfg.trial_seed(k);
        let mut objective = bench.objective();
        let outcome = if cfg.record_diagnostics {
            run_observed(&mut objective, &opt, &bench.x0, &mut DiagnosticsTracker::default())
        } else {
            run_observed(&mut objective, &opt, &bench.x0, &mut NoDiagnostics)
        };
        match outcome {
            Ok(trace) => Ok(trace),
            Err(ZoError::Diverged { trace, .. }) => Ok(*trace),
            Err(e) => Err(e),
        }
    };

    let traces: Vec<RunTrace> = match cfg.workers {
        Some(1) => (0..cfg.trials).map(run_trial).collect::<Result<_>>()?,
        workers => {
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(n) = workers {
                builder = builder.num_threads(n);
            }
            let pool = builder
                .build()
                .map_err(|e| ZoError::ExperimentFailed(format!("cannot start worker pool: {e}")))?;
            pool.install(|| (0..cfg.trials).into_par_iter().map(run_trial).collect::<Result<_>>())?
        }
    };

    let optimum = bench.problem.optimum_value().unwrap_or(0.0);
    let diverged = traces.iter().filter(|t| t.diverged).count();
    if diverged == traces.len() {
        let at: Vec<usize> = traces.iter().map(|t| t.iterations()).collect();
        return Err(ZoError::ExperimentFailed(format!(
            "all {} trials diverged (iterations completed per trial: {at:?})",
            traces.len()
        )));
    }
    let curve = aggregate_trials(&traces, optimum, cfg.confidence)?;
    Ok(ExperimentResult {
        config: cfg.clone(),
        traces,
        curve,
        optimum,
    })
}
