use crate::linalg::DenseVector;
use crate::objective::Problem;

/// `Σ_{i=1}^{d−1} [100((x_i + 1)² − x_{i+1} − 1)² + x_i²]`, a shifted
/// Rosenbrock function with minimizer `0` and minimum `0`.
#[derive(Debug, Clone, Copy)]
pub struct RosenbrockProblem {
    dim: usize,
}

impl RosenbrockProblem {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Problem for RosenbrockProblem {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &DenseVector) -> f64 {
        (0..self.dim.saturating_sub(1))
            .map(|i| {
                let r = (x[i] + 1.0).powi(2) - x[i + 1] - 1.0;
                100.0 * r * r + x[i] * x[i]
            })
            .sum()
    }

    fn gradient(&self, x: &DenseVector) -> Option<DenseVector> {
        let mut g = DenseVector::zeros(self.dim);
        for i in 0..self.dim.saturating_sub(1) {
            let r = (x[i] + 1.0).powi(2) - x[i + 1] - 1.0;
            g[i] += 400.0 * r * (x[i] + 1.0) + 2.0 * x[i];
            g[i + 1] -= 200.0 * r;
        }
        Some(g)
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn name(&self) -> &str {
        "rosenbrock"
    }
}
