//! Plain-text dataset files so separate processes can share identical data.
//!
//! ```text
//! # reszo dataset v1
//! kind=ridge
//! rows=1000
//! cols=100
//! lambda=0.1
//! teacher=...            (network only, comma separated)
//! initial=...            (network only, comma separated)
//! data
//! f_1,...,f_cols,target  (one line per sample)
//! ```
//!
//! Numbers use the shortest decimal form that parses back to the same
//! `f64`, so a save/load round trip is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::{Benchmark, BenchmarkSpec, LogisticProblem, NetworkLayout, NeuralNetProblem, ProblemKind, RidgeProblem};
use crate::error::{Result, ZoError};
use crate::linalg::{DenseMatrix, DenseVector};
use crate::objective::Problem;

const MAGIC: &str = "# reszo dataset v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: ProblemKind,
    pub lambda: f64,
    /// One sample per row.
    pub features: DenseMatrix,
    pub targets: DenseVector,
    pub teacher: Option<DenseVector>,
    pub initial: Option<DenseVector>,
}

impl Dataset {
    pub fn generate(spec: &BenchmarkSpec) -> Result<Self> {
        spec.validate()?;
        match spec.problem {
            ProblemKind::Ridge => {
                let p = RidgeProblem::generate(spec)?;
                Ok(Self::plain(spec, p.features().clone(), p.targets().clone()))
            }
            ProblemKind::Logistic => {
                let p = LogisticProblem::generate(spec)?;
                Ok(Self::plain(spec, p.samples().clone(), p.labels().clone()))
            }
            ProblemKind::NeuralNet => {
                let p = NeuralNetProblem::generate(spec)?;
                let n = p.layout().width;
                let mut features = DenseMatrix::zeros(p.inputs().len(), n);
                for (i, s) in p.inputs().iter().enumerate() {
                    features.set_row(i, &s.transpose());
                }
                Ok(Self {
                    kind: spec.problem,
                    lambda: spec.lambda,
                    features,
                    targets: p.targets().clone(),
                    teacher: Some(p.teacher().clone()),
                    initial: Some(p.initial_point().clone()),
                })
            }
            ProblemKind::Rosenbrock => Err(ZoError::precondition("rosenbrock has no dataset")),
        }
    }

    fn plain(spec: &BenchmarkSpec, features: DenseMatrix, targets: DenseVector) -> Self {
        Self {
            kind: spec.problem,
            lambda: spec.lambda,
            features,
            targets,
            teacher: None,
            initial: None,
        }
    }

    /// Rebuild the benchmark this dataset was generated from.
    pub fn into_benchmark(self, spec: &BenchmarkSpec) -> Result<Benchmark> {
        let d = spec.d;
        let (problem, x0): (Arc<dyn Problem>, DenseVector) = match self.kind {
            ProblemKind::Ridge => (
                Arc::new(RidgeProblem::from_data(self.features, self.targets, self.lambda)?),
                DenseVector::zeros(d),
            ),
            ProblemKind::Logistic => (
                Arc::new(LogisticProblem::from_data(self.features, self.targets, self.lambda)?),
                DenseVector::zeros(d),
            ),
            ProblemKind::NeuralNet => {
                let layout = NetworkLayout::new(self.features.ncols());
                let inputs = self.features.row_iter().map(|r| r.transpose()).collect();
                let teacher = self
                    .teacher
                    .ok_or_else(|| ZoError::Config("dataset lacks teacher".into()))?;
                let initial = self
                    .initial
                    .ok_or_else(|| ZoError::Config("dataset lacks initial".into()))?;
                let p = NeuralNetProblem::from_data(layout, inputs, teacher, initial)?;
                let x0 = p.initial_point().clone();
                (Arc::new(p), x0)
            }
            ProblemKind::Rosenbrock => return Err(ZoError::precondition("rosenbrock has no dataset")),
        };
        if problem.dimension() != d {
            return Err(ZoError::DimensionMismatch {
                expected: d,
                actual: problem.dimension(),
            });
        }
        Ok(Benchmark {
            spec: spec.clone(),
            problem,
            x0,
        })
    }
}

fn join(values: impl Iterator<Item = f64>) -> String {
    let mut s = String::new();
    for (i, v) in values.enumerate() {
        if i > 0 {
            s.push(',');
        }
        write!(s, "{v}").expect("write to string");
    }
    s
}

fn parse_list(line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| ZoError::Config(format!("bad number '{t}': {e}")))
        })
        .collect()
}

pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let (rows, cols) = data.features.shape();
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "kind={}", data.kind.name()).unwrap();
    writeln!(out, "rows={rows}").unwrap();
    writeln!(out, "cols={cols}").unwrap();
    writeln!(out, "lambda={}", data.lambda).unwrap();
    if let Some(t) = &data.teacher {
        writeln!(out, "teacher={}", join(t.iter().copied())).unwrap();
    }
    if let Some(x) = &data.initial {
        writeln!(out, "initial={}", join(x.iter().copied())).unwrap();
    }
    writeln!(out, "data").unwrap();
    for i in 0..rows {
        let row = data.features.row(i);
        writeln!(
            out,
            "{}",
            join(row.iter().copied().chain(std::iter::once(data.targets[i])))
        )
        .unwrap();
    }
    fs::write(path, out).map_err(|e| ZoError::Export(format!("{}: {e}", path.display())))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(ZoError::Config(format!("{} is not a dataset file", path.display())));
    }
    let (mut kind, mut rows, mut cols, mut lambda, mut teacher, mut initial) = (None, None, None, None, None, None);
    for line in lines.by_ref() {
        if line == "data" {
            break;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ZoError::Config(format!("malformed header line '{line}'")))?;
        let bad = |e: &dyn std::fmt::Display| ZoError::Config(format!("bad {key}: {e}"));
        match key {
            "kind" => kind = Some(value.parse::<ProblemKind>()?),
            "rows" => rows = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
            "cols" => cols = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
            "lambda" => lambda = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
            "teacher" => teacher = Some(DenseVector::from_vec(parse_list(value)?)),
            "initial" => initial = Some(DenseVector::from_vec(parse_list(value)?)),
            other => return Err(ZoError::Config(format!("unknown header key '{other}'"))),
        }
    }
    let missing = |k: &str| ZoError::Config(format!("dataset header lacks '{k}'"));
    let (rows, cols) = (
        rows.ok_or_else(|| missing("rows"))?,
        cols.ok_or_else(|| missing("cols"))?,
    );
    let mut features = DenseMatrix::zeros(rows, cols);
    let mut targets = DenseVector::zeros(rows);
    let mut count = 0;
    for (i, line) in lines.filter(|l| !l.is_empty()).enumerate() {
        if i >= rows {
            return Err(ZoError::Config("more data lines than rows".into()));
        }
        let values = parse_list(line)?;
        if values.len() != cols + 1 {
            return Err(ZoError::DimensionMismatch {
                expected: cols + 1,
                actual: values.len(),
            });
        }
        for j in 0..cols {
            features[(i, j)] = values[j];
        }
        targets[i] = values[cols];
        count += 1;
    }
    if count != rows {
        return Err(ZoError::Config(format!("expected {rows} data lines, found {count}")));
    }
    Ok(Dataset {
        kind: kind.ok_or_else(|| missing("kind"))?,
        lambda: lambda.ok_or_else(|| missing("lambda"))?,
        features,
        targets,
        teacher,
        initial,
    })
}
