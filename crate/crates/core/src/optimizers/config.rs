use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoError};
use crate::regression::LinearMode;
use crate::sampling::DirectionDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Szo,
    Rszo,
    Tzo,
    LReszo,
    QReszo,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Szo, Method::Rszo, Method::Tzo, Method::LReszo, Method::QReszo];

    pub fn name(self) -> &'static str {
        match self {
            Method::Szo => "szo",
            Method::Rszo => "rszo",
            Method::Tzo => "tzo",
            Method::LReszo => "l_reszo",
            Method::QReszo => "q_reszo",
        }
    }

    pub fn is_regression(self) -> bool {
        matches!(self, Method::LReszo | Method::QReszo)
    }

    /// Queries after `t` iterations.
    pub fn queries_after(self, t: usize) -> u64 {
        let t = t as u64;
        match self {
            Method::Szo => t,
            Method::Tzo => 2 * t,
            Method::Rszo | Method::LReszo | Method::QReszo => t + 1,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = ZoError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| ZoError::Config(format!("unknown method '{s}'")))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Step size.
    pub eta: f64,
    /// Smoothing radius. Zero is accepted for the regression methods.
    pub delta: f64,
    /// Warm-start step size.
    #[serde(default = "default_warm_eta")]
    pub warm_eta: f64,
    /// Warm-start smoothing radius.
    #[serde(default = "default_warm_delta")]
    pub warm_delta: f64,
    #[serde(default = "default_window")]
    pub window_m: usize,
    pub iterations: usize,
    #[serde(default)]
    pub adaptive_delta: bool,
    /// Floor for the adaptive radius. Defaults to `1e-12 · delta`.
    #[serde(default)]
    pub delta_min: Option<f64>,
    #[serde(default)]
    pub regression_mode: LinearMode,
    #[serde(default)]
    pub fast_path: bool,
    #[serde(default)]
    pub direction_distribution: DirectionDistribution,
    #[serde(default)]
    pub seed: u64,
    /// Evaluate `f(x_{t+1})` through the uncounted oracle after every
    /// iteration, for gap curves. Turn off when each call to the objective
    /// has side effects.
    #[serde(default = "default_record_values")]
    pub record_iterate_values: bool,
}

fn default_warm_eta() -> f64 {
    2.5e-6
}
fn default_warm_delta() -> f64 {
    0.2
}
fn default_window() -> usize {
    110
}
fn default_record_values() -> bool {
    true
}

impl OptimizerConfig {
    /// Configuration with the defaults for every optional field.
    pub fn new(method: Method, eta: f64, delta: f64, iterations: usize) -> Self {
        Self {
            method,
            eta,
            delta,
            warm_eta: default_warm_eta(),
            warm_delta: default_warm_delta(),
            window_m: default_window(),
            iterations,
            adaptive_delta: false,
            delta_min: None,
            regression_mode: LinearMode::default(),
            fast_path: false,
            direction_distribution: DirectionDistribution::default(),
            seed: 0,
            record_iterate_values: true,
        }
    }

    pub fn effective_delta_min(&self) -> f64 {
        self.delta_min.unwrap_or(1e-12 * self.delta)
    }

    /// Multiplier applied to the single- and two-point estimators: `d` for
    /// sphere directions, 1 for Gaussian directions.
    pub fn direction_factor(&self, d: usize) -> f64 {
        match self.direction_distribution {
            DirectionDistribution::Sphere => d as f64,
            DirectionDistribution::Gaussian => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.eta) {
            return Err(ZoError::Config(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(ZoError::Config(format!(
                "delta must be non-negative, got {}",
                self.delta
            )));
        }
        if let Some(dm) = self.delta_min {
            if !(dm >= 0.0) || !dm.is_finite() {
                return Err(ZoError::Config(format!("delta_min must be non-negative, got {dm}")));
            }
        }
        if self.iterations == 0 {
            return Err(ZoError::Config("iterations must be at least 1".into()));
        }
        if self.method.is_regression() {
            if !positive(self.warm_eta) || !positive(self.warm_delta) {
                return Err(ZoError::Config("warm_eta and warm_delta must be positive".into()));
            }
            if self.window_m < 2 {
                return Err(ZoError::Config("window_m must be at least 2".into()));
            }
            if self.iterations <= self.window_m {
                return Err(ZoError::Config(format!(
                    "iterations ({}) must exceed window_m ({})",
                    self.iterations, self.window_m
                )));
            }
        } else if self.delta <= 0.0 {
            return Err(ZoError::Config(format!(
                "{} needs a positive delta, got {}",
                self.method, self.delta
            )));
        }
        Ok(())
    }
}
