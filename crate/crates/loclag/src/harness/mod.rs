//! Experiment harness: sphere convergence, timing sweeps, and repeated
//! cross-validation on tabular data, all deterministic functions of
//! (config, seed, dataset bytes).

mod energy;
mod report;
mod sphere;
mod timing;

pub use energy::{feature_importance, run_energy_cv, EnergyCvConfig, FeatureImportance};
pub use report::{
    read_cv_rows_csv, read_sphere_rows_csv, read_timing_rows_csv, CvFoldRow, CvReport, CvRow,
    ExperimentReport, ReportFormat, SphereConvergenceReport, SphereRow, TimingReport, TimingRow,
};
pub use sphere::{fibonacci_sphere, run_sphere_convergence, SphereConvergenceConfig};
pub use timing::{run_timing, TimingConfig};

use thiserror::Error;

use crate::basis::BasisError;
use crate::graph::GraphError;
use crate::interp::InterpError;
use crate::io::IoError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Dynamic(#[from] crate::dynamic::DynamicError),
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("need at least two features, got {0}")]
    TooFewFeatures(usize),
    #[error("every feature has zero variance")]
    AllFeaturesConstant,
    #[error("all pairwise distances are zero")]
    DegenerateDistances,
    #[error("no connected graph up to epsilon {max_epsilon}")]
    NoConnectedRadius { max_epsilon: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
