use std::collections::VecDeque;

use super::solve::{gram_condition_estimate, rank1_swap_inverse, spd_inverse};
use crate::error::{Result, ZoError};
use crate::linalg::{ensure_dim, ensure_finite, DenseMatrix, DenseVector};

/// Inverse of `X̂ᵀX̂` for the homogeneous rows `(x̂ − anchor, 1)`.
///
/// The anchor is the newest point at the time the cache was last rebuilt.
/// Anchoring leaves the fitted slope unchanged (it is a translation of the
/// inputs) but keeps the Gram matrix from inheriting the magnitude of the
/// iterate itself.
#[derive(Debug, Clone)]
pub struct InverseCache {
    pub anchor: DenseVector,
    pub inverse: DenseMatrix,
    pub swaps_since_rebuild: usize,
}

/// The latest `m` evaluated pairs `(x̂, f(x̂))`, newest last.
#[derive(Debug, Clone)]
pub struct EvaluationWindow {
    capacity: usize,
    dim: usize,
    points: VecDeque<DenseVector>,
    values: VecDeque<f64>,
    track_inverse: bool,
    cache: Option<InverseCache>,
    rebuilds: u64,
    swap_failures: u64,
}

impl EvaluationWindow {
    pub fn new(capacity: usize, dim: usize) -> Result<Self> {
        if capacity < 1 || dim < 1 {
            return Err(ZoError::precondition(
                "window capacity and dimension must be at least 1",
            ));
        }
        Ok(Self {
            capacity,
            dim,
            points: VecDeque::with_capacity(capacity + 1),
            values: VecDeque::with_capacity(capacity + 1),
            track_inverse: false,
            cache: None,
            rebuilds: 0,
            swap_failures: 0,
        })
    }

    /// Window that also maintains the cached Gram inverse used by the fast
    /// linear fit. The cache exists only while the window is full and its
    /// Gram matrix is numerically invertible.
    pub fn with_inverse_cache(capacity: usize, dim: usize) -> Result<Self> {
        let mut w = Self::new(capacity, dim)?;
        w.track_inverse = true;
        Ok(w)
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.points.len() == self.capacity
    }

    /// Swaps between full rebuilds of the cached inverse.
    pub fn rebuild_interval(&self) -> usize {
        self.dim.max(64)
    }

    /// Points, oldest first.
    pub fn points(&self) -> impl DoubleEndedIterator<Item = &DenseVector> + ExactSizeIterator {
        self.points.iter()
    }

    /// Values, oldest first.
    pub fn values(&self) -> impl DoubleEndedIterator<Item = &f64> + ExactSizeIterator {
        self.values.iter()
    }

    pub fn newest(&self) -> Option<(&DenseVector, f64)> {
        Some((self.points.back()?, *self.values.back()?))
    }

    pub fn oldest(&self) -> Option<(&DenseVector, f64)> {
        Some((self.points.front()?, *self.values.front()?))
    }

    pub fn inverse_cache(&self) -> Option<&InverseCache> {
        self.cache.as_ref()
    }

    /// Full rebuilds of the cached inverse so far.
    pub fn rebuild_count(&self) -> u64 {
        self.rebuilds
    }

    /// Rank-1 swaps rejected as singular so far.
    pub fn swap_failure_count(&self) -> u64 {
        self.swap_failures
    }

    /// Largest distance from the newest point to any other point.
    pub fn spread(&self) -> f64 {
        let Some((newest, _)) = self.newest() else {
            return 0.0;
        };
        self.points.iter().map(|p| (p - newest).norm()).fold(0.0, f64::max)
    }

    pub fn push(&mut self, point: DenseVector, value: f64) -> Result<()> {
        ensure_dim(&point, self.dim)?;
        ensure_finite(&point, "window point")?;
        if !value.is_finite() {
            return Err(ZoError::Numeric(format!("window value {value} is not finite")));
        }

        let dropped = if self.is_full() {
            self.values.pop_front();
            self.points.pop_front()
        } else {
            None
        };
        self.points.push_back(point);
        self.values.push_back(value);

        if !self.track_inverse {
            return Ok(());
        }
        match (dropped, self.cache.take()) {
            (Some(old), Some(mut cache)) if cache.swaps_since_rebuild + 1 < self.rebuild_interval() => {
                let new = self.points.back().expect("just pushed");
                let drop_row = homogeneous(&old, &cache.anchor);
                let add_row = homogeneous(new, &cache.anchor);
                match rank1_swap_inverse(&cache.inverse, &drop_row, &add_row) {
                    Ok(inv) => {
                        cache.inverse = inv;
                        cache.swaps_since_rebuild += 1;
                        self.cache = Some(cache);
                    }
                    Err(_) => {
                        self.swap_failures += 1;
                        self.rebuild_cache();
                    }
                }
            }
            _ => {
                if self.is_full() {
                    self.rebuild_cache();
                }
            }
        }
        Ok(())
    }

    /// Rebuild the cached inverse from scratch (no-op without tracking or
    /// before the window is full).
    pub fn refresh_inverse(&mut self) {
        if self.track_inverse && self.is_full() {
            self.rebuild_cache();
        }
    }

    /// Anchored homogeneous design `[(x̂_i − anchor)ᵀ, 1]`, newest row first.
    pub fn anchored_design(&self, anchor: &DenseVector) -> DenseMatrix {
        let m = self.len();
        let mut x = DenseMatrix::zeros(m, self.dim + 1);
        for (i, p) in self.points.iter().rev().enumerate() {
            for j in 0..self.dim {
                x[(i, j)] = p[j] - anchor[j];
            }
            x[(i, self.dim)] = 1.0;
        }
        x
    }

    fn rebuild_cache(&mut self) {
        self.cache = None;
        if self.len() < self.dim + 1 {
            return;
        }
        let anchor = self.points.back().expect("non-empty").clone();
        let x = self.anchored_design(&anchor);
        if let Some(inverse) = spd_inverse(&x.tr_mul(&x)) {
            self.rebuilds += 1;
            self.cache = Some(InverseCache {
                anchor,
                inverse,
                swaps_since_rebuild: 0,
            });
        }
    }

    /// Estimate of the condition number of the anchored homogeneous Gram
    /// matrix. Uses the cached inverse when present, which keeps the cost at
    /// O(m d + d²) per power step.
    pub fn gram_condition_estimate(&self) -> f64 {
        const STEPS: usize = 20;
        let Some((newest, _)) = self.newest() else {
            return f64::INFINITY;
        };
        match &self.cache {
            Some(cache) => {
                let x = self.anchored_design(&cache.anchor);
                let n = x.ncols();
                let start = DenseVector::from_fn(n, |i, _| 1.0 + 0.3 * ((i as f64) * 1.7).cos()).normalize();
                let lmax = power_steps(|v| x.tr_mul(&(&x * v)), start.clone(), STEPS);
                let inv_lmin = power_steps(|v| &cache.inverse * v, start, STEPS);
                if lmax.is_finite() && inv_lmin.is_finite() && inv_lmin > 0.0 {
                    lmax * inv_lmin
                } else {
                    f64::INFINITY
                }
            }
            None => gram_condition_estimate(&self.anchored_design(newest)),
        }
    }
}

fn power_steps(apply: impl Fn(&DenseVector) -> DenseVector, mut v: DenseVector, steps: usize) -> f64 {
    let mut lambda = 0.0;
    for _ in 0..steps {
        let w = apply(&v);
        lambda = v.dot(&w);
        let nw = w.norm();
        if nw == 0.0 || !nw.is_finite() {
            return if nw == 0.0 { 0.0 } else { f64::INFINITY };
        }
        v = w / nw;
    }
    lambda
}

fn homogeneous(p: &DenseVector, anchor: &DenseVector) -> DenseVector {
    let d = p.len();
    DenseVector::from_fn(d + 1, |i, _| if i < d { p[i] - anchor[i] } else { 1.0 })
}
