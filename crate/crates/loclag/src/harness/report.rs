//! Experiment reports and their CSV/JSON emission.
//!
//! JSON carries the full nested report; CSV carries one row per
//! configuration cell. Field order is fixed by the struct definitions and
//! floats use the shortest round-trip form, so a rerun with the same seed
//! produces byte-identical files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::io::IoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
}

/// One (R_i, R_o) cell of the sphere convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRow {
    pub n: usize,
    pub r_inner_multiple: f64,
    pub r_outer_multiple: f64,
    pub theta: f64,
    /// "ok" or "disconnected(sizes...)"; failed cells keep the row with
    /// empty measurements.
    pub status: String,
    pub mse_lagrange: Option<f64>,
    pub mse_local: Option<f64>,
    pub discrepancy_inside: Option<f64>,
    pub discrepancy_outside: Option<f64>,
    pub sparsity_lagrange: Option<f64>,
    pub sparsity_local: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereConvergenceReport {
    pub n: usize,
    pub unknown_stride: usize,
    pub discrepancy_sample: usize,
    pub rows: Vec<SphereRow>,
}

/// One graph size of the timing sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    pub known_count: usize,
    pub edge_count: usize,
    /// Median wall-clock seconds for the full Lagrange basis.
    pub t_lagrange_s: f64,
    /// Median wall-clock seconds for the serial local basis, neighborhood
    /// construction included.
    pub t_local_serial_s: f64,
    /// Median wall-clock seconds for a single-vertex insertion, serial like
    /// the local measurement it is compared against.
    pub t_update_s: f64,
    pub update_affected_centers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub r_inner_multiplier: f64,
    pub r_outer_multiplier: f64,
    pub repeats: usize,
    pub rows: Vec<TimingRow>,
}

/// Aggregated cross-validation cell: one (R_o, target) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub r_outer: f64,
    pub target: String,
    pub lagrange_mean: f64,
    pub lagrange_std: f64,
    pub local_mean: f64,
    pub local_std: f64,
}

/// Raw per-fold record underlying a [`CvRow`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvFoldRow {
    pub r_outer: f64,
    pub target: String,
    pub repetition: usize,
    pub fold: usize,
    pub test_size: usize,
    pub mse_lagrange: f64,
    pub mse_local: f64,
    /// Connectivity slack chosen from the deterministic grid for this fold.
    pub epsilon: f64,
    /// Features flagged as zero-variance during importance weighting.
    pub zero_variance_features: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub seed: u64,
    pub k_folds: usize,
    pub repetitions: usize,
    pub n_rows: usize,
    pub rows: Vec<CvRow>,
    pub per_fold: Vec<CvFoldRow>,
}

/// Any experiment outcome, ready for emission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentReport {
    SphereConvergence(SphereConvergenceReport),
    Timing(TimingReport),
    EnergyCv(CvReport),
}

impl ExperimentReport {
    /// Writes the report to `path`. CSV emits the per-cell rows; JSON emits
    /// the full nested report.
    pub fn emit(&self, format: ReportFormat, path: &Path) -> Result<(), IoError> {
        match format {
            ReportFormat::Json => crate::io::write_json(path, self),
            ReportFormat::Csv => {
                let file = std::fs::File::create(path).map_err(|source| IoError::File {
                    path: path.display().to_string(),
                    source,
                })?;
                let mut w = csv::Writer::from_writer(file);
                match self {
                    ExperimentReport::SphereConvergence(r) => {
                        for row in &r.rows {
                            w.serialize(row)?;
                        }
                        if r.rows.is_empty() {
                            w.write_record(SPHERE_HEADER)?;
                        }
                    }
                    ExperimentReport::Timing(r) => {
                        for row in &r.rows {
                            w.serialize(row)?;
                        }
                        if r.rows.is_empty() {
                            w.write_record(TIMING_HEADER)?;
                        }
                    }
                    ExperimentReport::EnergyCv(r) => {
                        for row in &r.rows {
                            w.serialize(row)?;
                        }
                        if r.rows.is_empty() {
                            w.write_record(CV_HEADER)?;
                        }
                    }
                }
                w.flush().map_err(|source| IoError::File {
                    path: path.display().to_string(),
                    source,
                })
            }
        }
    }

    pub fn read_json(path: &Path) -> Result<Self, IoError> {
        crate::io::read_json(path)
    }
}

const SPHERE_HEADER: [&str; 11] = [
    "n",
    "r_inner_multiple",
    "r_outer_multiple",
    "theta",
    "status",
    "mse_lagrange",
    "mse_local",
    "discrepancy_inside",
    "discrepancy_outside",
    "sparsity_lagrange",
    "sparsity_local",
];
const TIMING_HEADER: [&str; 7] = [
    "n",
    "known_count",
    "edge_count",
    "t_lagrange_s",
    "t_local_serial_s",
    "t_update_s",
    "update_affected_centers",
];
const CV_HEADER: [&str; 6] = [
    "r_outer",
    "target",
    "lagrange_mean",
    "lagrange_std",
    "local_mean",
    "local_std",
];

/// Reads rows back from a CSV emitted by [`ExperimentReport::emit`].
pub fn read_sphere_rows_csv(path: &Path) -> Result<Vec<SphereRow>, IoError> {
    read_rows(path)
}

pub fn read_timing_rows_csv(path: &Path) -> Result<Vec<TimingRow>, IoError> {
    read_rows(path)
}

pub fn read_cv_rows_csv(path: &Path) -> Result<Vec<CvRow>, IoError> {
    read_rows(path)
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, IoError> {
    let file = std::fs::File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::Reader::from_reader(file);
    reader.deserialize().collect::<Result<Vec<T>, _>>().map_err(Into::into)
}

/// Sample mean and (n−1)-normalized standard deviation.
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
