use super::{run_experiment_on, ExperimentConfig};
use crate::error::{Result, ZoError};

/// Trials per grid cell unless the caller overrides it.
pub const DEFAULT_GRID_TRIALS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub eta: f64,
    pub delta: f64,
    /// Mean final optimality gap; `+∞` when any trial diverged.
    pub score: f64,
    /// Queries for the mean gap to reach twice its final value.
    pub queries_to_double_final: Option<u64>,
    pub diverged_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: GridCell,
    /// Cells in grid order: η outer, δ inner.
    pub cells: Vec<GridCell>,
}

/// Score every `(η, δ)` pair by the mean final gap over a reduced number of
/// trials. Ties go to fewer queries to reach twice the final gap, then to the
/// smaller η.
pub fn grid_search(
    base: &ExperimentConfig,
    eta_grid: &[f64],
    delta_grid: &[f64],
    trials: Option<usize>,
) -> Result<GridResult> {
    if eta_grid.is_empty() || delta_grid.is_empty() {
        return Err(ZoError::precondition("grid search needs non-empty grids"));
    }
    let bench = base.build_benchmark()?;
    let trials = trials.unwrap_or(DEFAULT_GRID_TRIALS).max(1);

    let mut cells = Vec::with_capacity(eta_grid.len() * delta_grid.len());
    for &eta in eta_grid {
        for &delta in delta_grid {
            let mut cfg = base.clone();
            cfg.trials = trials;
            cfg.record_diagnostics = false;
            cfg.optimizer.eta = eta;
            cfg.optimizer.delta = delta;
            let cell = match run_experiment_on(&cfg, &bench) {
                Ok(res) if res.curve.diverged == 0 => {
                    let fin = res.curve.final_mean();
                    GridCell {
                        eta,
                        delta,
                        score: if fin.is_finite() { fin } else { f64::INFINITY },
                        queries_to_double_final: res.curve.queries_to_reach(2.0 * fin),
                        diverged_trials: 0,
                    }
                }
                Ok(res) => GridCell {
                    eta,
                    delta,
                    score: f64::INFINITY,
                    queries_to_double_final: None,
                    diverged_trials: res.curve.diverged,
                },
                Err(ZoError::ExperimentFailed(_)) => GridCell {
                    eta,
                    delta,
                    score: f64::INFINITY,
                    queries_to_double_final: None,
                    diverged_trials: trials,
                },
                Err(ZoError::Config(_)) => GridCell {
                    // Parameters outside the method's domain (for example a
                    // zero radius for a baseline).
                    eta,
                    delta,
                    score: f64::INFINITY,
                    queries_to_double_final: None,
                    diverged_trials: 0,
                },
                Err(e) => return Err(e),
            };
            cells.push(cell);
        }
    }

    let best = cells
        .iter()
        .min_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then_with(|| {
                    let qa = a.queries_to_double_final.unwrap_or(u64::MAX);
                    let qb = b.queries_to_double_final.unwrap_or(u64::MAX);
                    qa.cmp(&qb)
                })
                .then_with(|| a.eta.total_cmp(&b.eta))
        })
        .expect("non-empty grid")
        .clone();
    Ok(GridResult { best, cells })
}
