use nalgebra::linalg::Cholesky;
use rand::Rng;

use super::BenchmarkSpec;
use crate::error::{Result, ZoError};
use crate::linalg::{power_iteration_max_eig, DenseMatrix, DenseVector};
use crate::objective::Problem;

/// `½ Σ log(1 + exp(−y_i s_iᵀx)) + (λ/2)‖x‖²` with `s_i` uniform on
/// `[−1, 1]^d` and `y_i = sign(½ s_iᵀ1)`.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    samples: DenseMatrix,
    labels: DenseVector,
    lambda: f64,
    smoothness: f64,
    minimizer: DenseVector,
    optimum: f64,
}

/// `log(1 + exp(z))` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Logistic sigmoid without overflow.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticProblem {
    pub fn generate(spec: &BenchmarkSpec) -> Result<Self> {
        let (n, d) = (spec.samples(), spec.d);
        let mut rng = spec.rng();
        let mut s = DenseMatrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                s[(i, j)] = rng.random_range(-1.0..=1.0);
            }
        }
        let labels = DenseVector::from_fn(n, |i, _| if 0.5 * s.row(i).sum() >= 0.0 { 1.0 } else { -1.0 });
        Self::from_data(s, labels, spec.lambda)
    }

    pub fn from_data(samples: DenseMatrix, labels: DenseVector, lambda: f64) -> Result<Self> {
        if samples.nrows() != labels.len() {
            return Err(ZoError::DimensionMismatch {
                expected: samples.nrows(),
                actual: labels.len(),
            });
        }
        if !(lambda > 0.0) {
            return Err(ZoError::precondition("logistic regression needs lambda > 0"));
        }
        let gram = samples.tr_mul(&samples);
        let smoothness = power_iteration_max_eig(&gram, 1e-8, 100_000) / 8.0 + lambda;
        let mut p = Self {
            samples,
            labels,
            lambda,
            smoothness,
            minimizer: DenseVector::zeros(0),
            optimum: 0.0,
        };
        p.minimizer = p.solve_optimum()?;
        p.optimum = p.value(&p.minimizer);
        Ok(p)
    }

    pub fn samples(&self) -> &DenseMatrix {
        &self.samples
    }

    pub fn labels(&self) -> &DenseVector {
        &self.labels
    }

    pub fn minimizer(&self) -> &DenseVector {
        &self.minimizer
    }

    fn grad(&self, x: &DenseVector) -> DenseVector {
        let margins = &self.samples * x;
        let weights = DenseVector::from_fn(self.labels.len(), |i, _| {
            let y = self.labels[i];
            -0.5 * sigmoid(-y * margins[i]) * y
        });
        self.samples.tr_mul(&weights) + x * self.lambda
    }

    /// Damped Newton iteration from the origin until `‖∇f‖ ≤ 1e-10`.
    fn solve_optimum(&self) -> Result<DenseVector> {
        const GRAD_TOL: f64 = 1e-10;
        let d = self.samples.ncols();
        let mut x = DenseVector::zeros(d);
        for _ in 0..200 {
            let g = self.grad(&x);
            if g.norm() <= GRAD_TOL {
                return Ok(x);
            }
            let margins = &self.samples * &x;
            let mut weighted = self.samples.clone();
            for i in 0..weighted.nrows() {
                let p = sigmoid(self.labels[i] * margins[i]);
                let w = (0.5 * p * (1.0 - p)).sqrt();
                weighted.row_mut(i).scale_mut(w);
            }
            let hess = weighted.tr_mul(&weighted) + DenseMatrix::identity(d, d) * self.lambda;
            let step = Cholesky::new(hess)
                .ok_or_else(|| ZoError::Numeric("logistic Hessian is not positive definite".into()))?
                .solve(&g);
            let f0 = self.value(&x);
            let slope = g.dot(&step);
            let mut t = 1.0;
            loop {
                let trial = &x - &step * t;
                if self.value(&trial) <= f0 - 1e-4 * t * slope || t < 1e-12 {
                    x = trial;
                    break;
                }
                t *= 0.5;
            }
        }
        let g = self.grad(&x);
        if g.norm() <= GRAD_TOL {
            Ok(x)
        } else {
            Err(ZoError::Numeric(format!(
                "logistic optimum not resolved, gradient norm {:e}",
                g.norm()
            )))
        }
    }
}

impl Problem for LogisticProblem {
    fn dimension(&self) -> usize {
        self.samples.ncols()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        let margins = &self.samples * x;
        let loss: f64 = margins
            .iter()
            .zip(self.labels.iter())
            .map(|(&m, &y)| softplus(-y * m))
            .sum();
        0.5 * loss + 0.5 * self.lambda * x.norm_squared()
    }

    fn gradient(&self, x: &DenseVector) -> Option<DenseVector> {
        Some(self.grad(x))
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.smoothness)
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(self.optimum)
    }

    fn name(&self) -> &str {
        "logistic"
    }
}
