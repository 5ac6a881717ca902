use nalgebra::linalg::Cholesky;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::BenchmarkSpec;
use crate::error::{Result, ZoError};
use crate::linalg::{power_iteration_max_eig, DenseMatrix, DenseVector};
use crate::objective::Problem;

/// `½‖y − Hx‖² + (λ/2)‖x‖²` with `H` entries standard normal and
/// `y = ½ H·1 + ε`, `ε ~ N(0, 0.1 I)`.
///
/// Values are computed in the equivalent form `½(x − x*)ᵀA(x − x*) + f*`
/// with `A = HᵀH + λI`, which resolves optimality gaps far below the size of
/// `f*` itself.
#[derive(Debug, Clone)]
pub struct RidgeProblem {
    features: DenseMatrix,
    targets: DenseVector,
    lambda: f64,
    hessian: DenseMatrix,
    minimizer: DenseVector,
    optimum: f64,
    smoothness: f64,
}

impl RidgeProblem {
    pub fn generate(spec: &BenchmarkSpec) -> Result<Self> {
        let (n, d) = (spec.samples(), spec.d);
        let mut rng = spec.rng();
        // Filled row by row.
        let mut h = DenseMatrix::zeros(n, d);
        for i in 0..n {
            for j in 0..d {
                h[(i, j)] = StandardNormal.sample(&mut rng);
            }
        }
        let noise = Normal::new(0.0, 0.1f64.sqrt()).expect("valid normal");
        let half_row_sums = &h * DenseVector::from_element(d, 0.5);
        let y = DenseVector::from_fn(n, |i, _| half_row_sums[i] + noise.sample(&mut rng));
        Self::from_data(h, y, spec.lambda)
    }

    pub fn from_data(features: DenseMatrix, targets: DenseVector, lambda: f64) -> Result<Self> {
        if features.nrows() != targets.len() {
            return Err(ZoError::DimensionMismatch {
                expected: features.nrows(),
                actual: targets.len(),
            });
        }
        let d = features.ncols();
        let gram = features.tr_mul(&features);
        let hessian = &gram + DenseMatrix::identity(d, d) * lambda;
        let rhs = features.tr_mul(&targets);
        let minimizer = Cholesky::new(hessian.clone())
            .ok_or_else(|| ZoError::Numeric("ridge Hessian is not positive definite".into()))?
            .solve(&rhs);
        let optimum = direct_value(&features, &targets, lambda, &minimizer);
        let smoothness = power_iteration_max_eig(&gram, 1e-8, 100_000) + lambda;
        Ok(Self {
            features,
            targets,
            lambda,
            hessian,
            minimizer,
            optimum,
            smoothness,
        })
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn targets(&self) -> &DenseVector {
        &self.targets
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn minimizer(&self) -> &DenseVector {
        &self.minimizer
    }

    /// The objective evaluated in its defining form.
    pub fn direct_value(&self, x: &DenseVector) -> f64 {
        direct_value(&self.features, &self.targets, self.lambda, x)
    }
}

fn direct_value(h: &DenseMatrix, y: &DenseVector, lambda: f64, x: &DenseVector) -> f64 {
    0.5 * (y - h * x).norm_squared() + 0.5 * lambda * x.norm_squared()
}

impl Problem for RidgeProblem {
    fn dimension(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        let e = x - &self.minimizer;
        0.5 * e.dot(&(&self.hessian * &e)) + self.optimum
    }

    fn gradient(&self, x: &DenseVector) -> Option<DenseVector> {
        Some(&self.hessian * (x - &self.minimizer))
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.smoothness)
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(self.optimum)
    }

    fn name(&self) -> &str {
        "ridge"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::sampling::sample_gaussian;

    fn small() -> RidgeProblem {
        RidgeProblem::generate(&BenchmarkSpec::ridge(5).with_seed(3)).unwrap()
    }

    #[test]
    fn centered_and_direct_forms_agree() {
        let p = small();
        let mut rng = SeededRng::new(8);
        for _ in 0..10 {
            let x = sample_gaussian(&mut rng, 5).unwrap();
            let (a, b) = (p.value(&x), p.direct_value(&x));
            assert!((a - b).abs() <= 1e-9 * b.abs());
        }
    }

    #[test]
    fn gradient_is_normal_equation_residual() {
        let p = small();
        let x = DenseVector::from_vec(vec![0.1, -0.3, 0.2, 0.0, 1.0]);
        let direct = p.features().transpose() * (p.features() * &x - p.targets()) + &x * p.lambda();
        let g = p.gradient(&x).unwrap();
        assert!((&g - &direct).amax() <= 1e-9 * direct.amax());
        assert!(p.gradient(p.minimizer()).unwrap().amax() <= 1e-9);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = small();
        let b = small();
        assert_eq!(a.features(), b.features());
        assert_eq!(a.targets(), b.targets());
    }
}
