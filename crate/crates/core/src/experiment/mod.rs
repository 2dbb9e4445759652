//! End-to-end trials, scoring and Monte-Carlo sweeps.

mod config;
mod metrics;
pub mod selftest;
mod sweep;
mod trial;

pub use config::{Algorithm, ExperimentConfig};
pub use metrics::{
    detection_probability, error_cdf, match_angles, mse, success_resolve_percentage, TrialResult,
};
pub use sweep::{run_sweep, SweepKind, SweepRow, SweepTable};
pub use trial::{run_spectrum, run_trial, run_trial_point, AlgorithmOutput, TrialPoint};
