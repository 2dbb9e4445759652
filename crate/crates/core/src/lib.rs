//! Simulation and estimation toolkit for RIS-aided passive radar target
//! localization.
//!
//! The pipeline mirrors the physical chain:
//!
//! 1. [`scene`] synthesizes the access point waveform and the multipath data
//!    received at the passive radar (PR) for every RIS epoch.
//! 2. [`ris`] builds the unit-modulus RIS phase matrix that suppresses the
//!    static AP-to-RIS path.
//! 3. [`beamformer`] steers the PR array towards the RIS and collapses each
//!    epoch to a single beamformed row.
//! 4. [`nlms`] runs the batch or sequential NLMS estimator over an angle grid
//!    and detects spectral peaks, giving joint target count and angle
//!    estimates.
//! 5. [`experiment`] wires the stages together, scores trials against the
//!    ground truth and runs the Monte-Carlo sweeps.
//!
//! All angles on public interfaces are in degrees.

pub mod array;
pub mod beamformer;
pub mod cli;
pub mod csv;
pub mod error;
pub mod experiment;
pub mod kv;
pub mod nlms;
pub mod ris;
pub mod rng;
pub mod scene;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
