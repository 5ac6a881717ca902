use crate::error::{Result, ZoError};
use crate::optimizers::RunTrace;

/// Percentile of sorted data with linear interpolation between order
/// statistics: position `(n − 1) p`.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let pos = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Mean optimality gap across trials on a common query grid, with an
/// empirical percentile band.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub queries: Vec<u64>,
    pub mean_gap: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub confidence: f64,
    pub trials_used: usize,
    pub diverged: usize,
}

impl AggregateCurve {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean_gap.last().expect("non-empty curve")
    }

    /// Forward-filled mean gap at `queries`.
    pub fn mean_at(&self, queries: u64) -> f64 {
        let idx = self.queries.partition_point(|&q| q <= queries);
        self.mean_gap[idx.saturating_sub(1)]
    }

    /// First grid point where the mean gap is at or below `target`.
    pub fn queries_to_reach(&self, target: f64) -> Option<u64> {
        self.queries
            .iter()
            .zip(&self.mean_gap)
            .find(|(_, &g)| g <= target)
            .map(|(&q, _)| q)
    }
}

/// Per-trial gap samples `(queries, f(x) − f*)`, starting at the initial point.
pub fn gap_curve(trace: &RunTrace, optimum: f64) -> Vec<(u64, f64)> {
    trace.value_curve().map(|(q, v)| (q, v - optimum)).collect()
}

/// Align the non-diverged traces on the union of their query counts (each
/// trial forward-filled, and back-filled before its first sample), then take
/// the mean and the `(1 ± confidence)/2` percentiles pointwise. The band is
/// widened where needed so that it always contains the mean.
pub fn aggregate_trials(traces: &[RunTrace], optimum: f64, confidence: f64) -> Result<AggregateCurve> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ZoError::precondition(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let diverged = traces.iter().filter(|t| t.diverged).count();
    let curves: Vec<Vec<(u64, f64)>> = traces
        .iter()
        .filter(|t| !t.diverged)
        .map(|t| gap_curve(t, optimum))
        .collect();
    if curves.is_empty() {
        return Err(ZoError::precondition("no converged trials to aggregate"));
    }

    let mut grid: Vec<u64> = curves.iter().flat_map(|c| c.iter().map(|p| p.0)).collect();
    grid.sort_unstable();
    grid.dedup();

    let lower_p = (1.0 - confidence) / 2.0;
    let upper_p = (1.0 + confidence) / 2.0;
    let mut cursors = vec![0usize; curves.len()];
    let mut column = vec![0.0; curves.len()];
    let mut curve = AggregateCurve {
        queries: Vec::with_capacity(grid.len()),
        mean_gap: Vec::with_capacity(grid.len()),
        ci_low: Vec::with_capacity(grid.len()),
        ci_high: Vec::with_capacity(grid.len()),
        confidence,
        trials_used: curves.len(),
        diverged,
    };
    for &q in &grid {
        for (k, c) in curves.iter().enumerate() {
            while cursors[k] + 1 < c.len() && c[cursors[k] + 1].0 <= q {
                cursors[k] += 1;
            }
            column[k] = c[cursors[k]].1;
        }
        let mean = column.iter().sum::<f64>() / column.len() as f64;
        let mut sorted = column.clone();
        sorted.sort_by(f64::total_cmp);
        curve.queries.push(q);
        curve.mean_gap.push(mean);
        curve.ci_low.push(percentile(&sorted, lower_p).min(mean));
        curve.ci_high.push(percentile(&sorted, upper_p).max(mean));
    }
    Ok(curve)
}
