//! Fixed PR beamformer steered at the RIS.

use std::io::Write;

use ndarray::{Array1, Array2};

use crate::array::{fill_steering, steering_vector, AngleGrid, HALF_WAVELENGTH};
use crate::csv::{sig6, write_table};
use crate::error::{invalid, Error, Result};
use crate::scene::DataCube;
use crate::C64;

/// Distortionless weight vector: `w^H a(look_angle) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    pub w: Array1<C64>,
    pub look_angle: f64,
}

impl BeamWeights {
    /// Complex response `w^H a(theta)`.
    pub fn response(&self, theta: f64) -> C64 {
        let mut a = vec![C64::new(0.0, 0.0); self.w.len()];
        fill_steering(theta, HALF_WAVELENGTH, &mut a);
        self.w.iter().zip(&a).map(|(w, a)| w.conj() * a).sum()
    }
}

/// Beamformer output, `N_epoch x L`; row `n` is `w^H Y_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformedData {
    pub z: Array2<C64>,
}

impl BeamformedData {
    pub fn n_epoch(&self) -> usize {
        self.z.nrows()
    }

    pub fn snapshots(&self) -> usize {
        self.z.ncols()
    }

    /// Epoch-major dump: one line per (epoch, snapshot).
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let rows: Vec<Vec<String>> = self
            .z
            .indexed_iter()
            .map(|((n, l), v)| vec![n.to_string(), l.to_string(), sig6(v.re), sig6(v.im)])
            .collect();
        write_table(w, &["epoch", "snapshot", "re", "im"], &rows)
    }
}

/// `w = a(theta) / ||a(theta)||^2` for the half-wavelength PR array.
pub fn compute_weights(theta_ris_pr: f64, n_pr: usize) -> Result<BeamWeights> {
    let a = steering_vector(theta_ris_pr, n_pr, HALF_WAVELENGTH)?;
    let norm2 = a.norm_sqr();
    Ok(BeamWeights {
        w: a.elements.mapv(|x| x / norm2),
        look_angle: theta_ris_pr,
    })
}

/// `|w^H a(theta)|` on every grid angle.
pub fn beampattern(w: &BeamWeights, grid: &AngleGrid) -> Vec<f64> {
    grid.values().iter().map(|&t| w.response(t).norm()).collect()
}

pub fn beamform(cube: &DataCube, w: &BeamWeights) -> Result<BeamformedData> {
    if cube.epochs.is_empty() {
        return invalid("cannot beamform an empty data cube");
    }
    let (n_pr, l) = (cube.pr_antennas(), cube.snapshots());
    if w.w.len() != n_pr {
        return Err(Error::DimensionMismatch {
            what: "beam weights vs PR antennas",
            expected: n_pr,
            got: w.w.len(),
        });
    }
    let wh = w.w.mapv(|x| x.conj());
    let mut z = Array2::zeros((cube.n_epoch(), l));
    for (n, ep) in cube.epochs.iter().enumerate() {
        if ep.y.dim() != (n_pr, l) {
            return Err(Error::DimensionMismatch {
                what: "epoch shape",
                expected: n_pr * l,
                got: ep.y.len(),
            });
        }
        z.row_mut(n).assign(&wh.dot(&ep.y));
    }
    Ok(BeamformedData { z })
}
