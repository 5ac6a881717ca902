//! Random perturbation directions.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZoError};
use crate::linalg::DenseVector;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionDistribution {
    /// Uniform on the unit sphere.
    #[default]
    Sphere,
    /// Standard multivariate normal.
    Gaussian,
}

impl DirectionDistribution {
    pub fn sample(self, rng: &mut SeededRng, d: usize) -> Result<DenseVector> {
        match self {
            DirectionDistribution::Sphere => sample_unit_sphere(rng, d),
            DirectionDistribution::Gaussian => sample_gaussian(rng, d),
        }
    }
}

pub fn sample_gaussian(rng: &mut SeededRng, d: usize) -> Result<DenseVector> {
    if d == 0 {
        return Err(ZoError::precondition("direction dimension must be at least 1"));
    }
    Ok(DenseVector::from_fn(d, |_, _| StandardNormal.sample(rng)))
}

/// Normalized Gaussian draw. Redraws in the (measure-zero) event of an
/// all-zero vector.
pub fn sample_unit_sphere(rng: &mut SeededRng, d: usize) -> Result<DenseVector> {
    loop {
        let g = sample_gaussian(rng, d)?;
        let norm = g.norm();
        if norm > 0.0 && norm.is_finite() {
            return Ok(g / norm);
        }
    }
}
