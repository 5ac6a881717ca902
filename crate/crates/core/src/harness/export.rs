//! CSV and manifest output.
//!
//! Reals are written in scientific notation with 17 significant digits, so
//! every value parses back to the identical `f64`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AggregateCurve, ExperimentConfig, ExperimentResult};
use crate::error::{Result, ZoError};
use crate::optimizers::RunTrace;
use crate::rng::SeededRng;

pub const CURVE_FILE: &str = "curve.csv";
pub const TRIALS_FILE: &str = "trials.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceInfo {
    pub library: String,
    pub version: String,
    pub rng: String,
    pub optimum: f64,
    pub trials_used: usize,
    pub diverged: usize,
}

/// Everything needed to re-run an experiment: the full configuration plus a
/// record of what produced the files next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub provenance: ProvenanceInfo,
    pub experiment: ExperimentConfig,
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn kept(len: usize, stride: usize) -> impl Iterator<Item = usize> {
    (0..len).filter(move |&i| i % stride == 0 || i + 1 == len)
}

fn export_err(path: &Path, e: impl std::fmt::Display) -> ZoError {
    ZoError::Export(format!("{}: {e}", path.display()))
}

fn write_curve(curve: &AggregateCurve, path: &Path, stride: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| export_err(path, e))?;
    w.write_record(["queries", "mean_gap", "ci_low", "ci_high"])?;
    for i in kept(curve.len(), stride) {
        w.write_record([
            curve.queries[i].to_string(),
            real(curve.mean_gap[i]),
            real(curve.ci_low[i]),
            real(curve.ci_high[i]),
        ])?;
    }
    w.flush().map_err(|e| export_err(path, e))
}

fn write_trials(traces: &[RunTrace], path: &Path, stride: usize) -> Result<()> {
    let with_diag = traces.iter().any(|t| t.has_diagnostics());
    let mut header = vec![
        "trial",
        "iteration",
        "queries",
        "f_value",
        "iterate_value",
        "grad_est_norm",
        "delta_t",
    ];
    if with_diag {
        header.extend(["xi_norm", "cd_ratio"]);
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| export_err(path, e))?;
    w.write_record(&header)?;
    for (k, t) in traces.iter().enumerate() {
        for i in kept(t.records.len(), stride) {
            let r = &t.records[i];
            let mut row = vec![
                k.to_string(),
                r.iteration.to_string(),
                r.queries.to_string(),
                real(r.f_value),
                real(r.iterate_value),
                real(r.grad_est_norm),
                real(r.delta),
            ];
            if with_diag {
                let d = r.diagnostics.as_ref();
                row.push(d.map(|d| real(d.xi_norm)).unwrap_or_default());
                row.push(d.and_then(|d| d.cd_ratio).map(real).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| export_err(path, e))
}

/// Write `curve.csv`, `trials.csv` and `manifest.toml` into `dir`, creating
/// it if needed. On failure the in-memory result is untouched.
pub fn export_results(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| export_err(dir, e))?;
    let stride = result.config.stride.max(1);
    write_curve(&result.curve, &dir.join(CURVE_FILE), stride)?;
    write_trials(&result.traces, &dir.join(TRIALS_FILE), stride)?;

    let manifest = Manifest {
        provenance: ProvenanceInfo {
            library: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: SeededRng::ALGORITHM.to_string(),
            optimum: result.optimum,
            trials_used: result.curve.trials_used,
            diverged: result.curve.diverged,
        },
        experiment: result.config.clone(),
    };
    let text = toml::to_string(&manifest).map_err(|e| ZoError::Export(e.to_string()))?;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, text).map_err(|e| export_err(&path, e))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| ZoError::Config(e.to_string()))
}

/// Query grid, mean gap, band low, band high.
pub type CurveColumns = (Vec<u64>, Vec<f64>, Vec<f64>, Vec<f64>);

/// Parse a `curve.csv` back into its columns.
pub fn read_curve_csv(path: &Path) -> Result<CurveColumns> {
    let mut r = csv::Reader::from_path(path).map_err(|e| export_err(path, e))?;
    let (mut q, mut m, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let parse = |s: &str| {
        s.parse::<f64>()
            .map_err(|e| ZoError::Export(format!("bad number '{s}': {e}")))
    };
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(ZoError::Export(format!("expected 4 columns, found {}", rec.len())));
        }
        q.push(rec[0].parse::<u64>().map_err(|e| ZoError::Export(e.to_string()))?);
        m.push(parse(&rec[1])?);
        lo.push(parse(&rec[2])?);
        hi.push(parse(&rec[3])?);
    }
    Ok((q, m, lo, hi))
}

/// One CSV holding several labelled curves:
/// `method,queries,mean_gap,ci_low,ci_high`.
pub fn export_merged_curves(curves: &[(String, &AggregateCurve)], path: &Path, stride: usize) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| export_err(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| export_err(path, e))?;
    w.write_record(["method", "queries", "mean_gap", "ci_low", "ci_high"])?;
    for (label, curve) in curves {
        for i in kept(curve.len(), stride.max(1)) {
            w.write_record([
                label.clone(),
                curve.queries[i].to_string(),
                real(curve.mean_gap[i]),
                real(curve.ci_low[i]),
                real(curve.ci_high[i]),
            ])?;
        }
    }
    w.flush().map_err(|e| export_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 2.2250738585072014e-308, 123456789.12345679, -7.5e-17] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn stride_keeps_last_row() {
        assert_eq!(kept(7, 3).collect::<Vec<_>>(), vec![0, 3, 6]);
        assert_eq!(kept(8, 3).collect::<Vec<_>>(), vec![0, 3, 6, 7]);
        assert_eq!(kept(3, 1).count(), 3);
    }
}
