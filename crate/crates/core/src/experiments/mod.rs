//! Seeded Monte Carlo scenarios with summary statistics and verdicts.
//!
//! A run is a pure function of its [`ExperimentConfig`]: every per-trial record
//! derives from `(master_seed, trial_index)` alone, trials run on a rayon pool
//! in any order, and records are sorted by `trial_index` before summarizing.

mod config;
mod report;
mod scenarios;
pub mod stats;

use thiserror::Error;

use crate::matrix::MatrixError;
use crate::norms::NormError;
use crate::sample::SampleError;
use crate::spectral::SpectralError;

pub use config::{
    EnsembleKind, ExperimentConfig, GridPoint, PartialConfig, Scenario, CERTIFICATE_MAX_N,
};
pub use report::{
    recompute_summaries, CertificateEntry, ExperimentReport, Status, Summary, TrialRecord, Verdict,
    SCHEMA_VERSION,
};
pub use scenarios::{
    run, run_gaussian_row_concentration, run_levy_tails, run_mean_width, run_nonlocality_sweep,
    run_orthogonal_norm_band, run_qc_gap, run_quantum_norm_convergence, run_tau_approximation,
    ConcentrationTest,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}
