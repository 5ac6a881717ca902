use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::logistic::sigmoid;
use super::BenchmarkSpec;
use crate::error::{Result, ZoError};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::objective::Problem;

/// Parameter layout of the three-hidden-layer network of width `n`.
///
/// The flat vector is, in order: `W1`, `W2`, `W3` (each `n × n`, row-major),
/// then `b1`, `b2`, `b3`, `w_o` (each length `n`); `3n² + 4n` entries total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkLayout {
    pub width: usize,
}

/// Unpacked network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub weights: [DenseMatrix; 3],
    pub biases: [DenseVector; 3],
    pub output: DenseVector,
}

impl NetworkLayout {
    pub fn new(width: usize) -> Self {
        Self { width }
    }

    pub fn dimension(&self) -> usize {
        3 * self.width * self.width + 4 * self.width
    }

    pub fn from_dimension(d: usize) -> Result<Self> {
        (1..=d)
            .map(NetworkLayout::new)
            .take_while(|l| l.dimension() <= d)
            .find(|l| l.dimension() == d)
            .ok_or_else(|| ZoError::Config(format!("dimension {d} is not of the form 3n² + 4n")))
    }

    pub fn unpack(&self, x: &DenseVector) -> NetworkParams {
        let n = self.width;
        let mut at = 0;
        let mut take_matrix = || {
            let m = DenseMatrix::from_row_slice(n, n, &x.as_slice()[at..at + n * n]);
            at += n * n;
            m
        };
        let weights = [take_matrix(), take_matrix(), take_matrix()];
        let mut at = 3 * n * n;
        let mut take_vector = || {
            let v = DenseVector::from_column_slice(&x.as_slice()[at..at + n]);
            at += n;
            v
        };
        let biases = [take_vector(), take_vector(), take_vector()];
        let output = take_vector();
        NetworkParams {
            weights,
            biases,
            output,
        }
    }

    pub fn pack(&self, p: &NetworkParams) -> DenseVector {
        let mut flat = Vec::with_capacity(self.dimension());
        for w in &p.weights {
            for i in 0..self.width {
                flat.extend(w.row(i).iter().copied());
            }
        }
        for b in p.biases.iter().chain(std::iter::once(&p.output)) {
            flat.extend(b.iter().copied());
        }
        DenseVector::from_vec(flat)
    }
}

fn forward(p: &NetworkParams, input: &DenseVector) -> f64 {
    let mut h = input.clone();
    for (w, b) in p.weights.iter().zip(p.biases.iter()) {
        h = (w * h + b).map(sigmoid);
    }
    p.output.dot(&h)
}

/// Squared error of a sigmoid network against targets produced by a teacher
/// network with the same architecture.
#[derive(Debug, Clone)]
pub struct NeuralNetProblem {
    layout: NetworkLayout,
    inputs: Vec<DenseVector>,
    targets: DenseVector,
    teacher: DenseVector,
    initial: DenseVector,
}

impl NeuralNetProblem {
    /// Draws, in order from the spec's stream: the teacher parameters
    /// (standard normal), the inputs (standard normal, sample by sample), and
    /// the start offset (uniform on `[−1, 1]`).
    pub fn generate(spec: &BenchmarkSpec) -> Result<Self> {
        let layout = NetworkLayout::from_dimension(spec.d)?;
        let mut rng = spec.rng();
        let teacher = DenseVector::from_fn(spec.d, |_, _| StandardNormal.sample(&mut rng));
        let inputs: Vec<DenseVector> = (0..spec.samples())
            .map(|_| DenseVector::from_fn(layout.width, |_, _| StandardNormal.sample(&mut rng)))
            .collect();
        let offset = DenseVector::from_fn(spec.d, |_, _| rng.random_range(-1.0..=1.0));
        let initial = &teacher + offset;
        Self::from_data(layout, inputs, teacher, initial)
    }

    pub fn from_data(
        layout: NetworkLayout,
        inputs: Vec<DenseVector>,
        teacher: DenseVector,
        initial: DenseVector,
    ) -> Result<Self> {
        if teacher.len() != layout.dimension() || initial.len() != layout.dimension() {
            return Err(ZoError::DimensionMismatch {
                expected: layout.dimension(),
                actual: teacher.len(),
            });
        }
        if let Some(bad) = inputs.iter().find(|s| s.len() != layout.width) {
            return Err(ZoError::DimensionMismatch {
                expected: layout.width,
                actual: bad.len(),
            });
        }
        let params = layout.unpack(&teacher);
        let targets = DenseVector::from_iterator(inputs.len(), inputs.iter().map(|s| forward(&params, s)));
        Ok(Self {
            layout,
            inputs,
            targets,
            teacher,
            initial,
        })
    }

    pub fn layout(&self) -> NetworkLayout {
        self.layout
    }

    pub fn inputs(&self) -> &[DenseVector] {
        &self.inputs
    }

    pub fn targets(&self) -> &DenseVector {
        &self.targets
    }

    pub fn teacher(&self) -> &DenseVector {
        &self.teacher
    }

    /// Teacher parameters plus the uniform offset.
    pub fn initial_point(&self) -> &DenseVector {
        &self.initial
    }
}

impl Problem for NeuralNetProblem {
    fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    fn value(&self, x: &DenseVector) -> f64 {
        let params = self.layout.unpack(x);
        self.inputs
            .iter()
            .zip(self.targets.iter())
            .map(|(s, &y)| {
                let r = forward(&params, s) - y;
                r * r
            })
            .sum()
    }

    fn optimum_value(&self) -> Option<f64> {
        Some(0.0)
    }

    fn name(&self) -> &str {
        "neural_net"
    }
}
