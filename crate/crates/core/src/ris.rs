//! RIS phase configuration.
//!
//! The static AP-to-RIS path is removed by picking every RIS configuration
//! from the orthogonal complement of the AP steering vector. A random
//! combination of the projector rows is drawn per epoch and then pushed onto
//! the unit-modulus set by keeping only the phase. The phase step loses the
//! exact null, so the residual AP leakage is only reduced on average.

use std::io::Write;

use ndarray::{Array2, ArrayView1};
use rand_distr::{Distribution, StandardNormal};

use crate::array::{steering_vector, SteeringVector, HALF_WAVELENGTH};
use crate::csv::{sig6, write_table};
use crate::error::{invalid, Error, Result};
use crate::rng::{self, stream};
use crate::C64;

const UNIT_TOL: f64 = 1e-12;

/// `N_epoch x M` matrix of unit-modulus RIS coefficients; row `n` is `v_n^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    v: Array2<C64>,
}

impl PhaseMatrix {
    /// Validates the unit-modulus constraint.
    pub fn new(v: Array2<C64>) -> Result<Self> {
        if v.nrows() == 0 {
            return invalid("phase matrix needs at least one epoch");
        }
        if let Some(bad) = v.iter().find(|z| (z.norm() - 1.0).abs() > UNIT_TOL) {
            return invalid(format!("RIS coefficient {bad} is not unit modulus"));
        }
        Ok(Self { v })
    }

    /// `N_epoch x 0` placeholder for campaigns without a RIS.
    pub fn no_ris(n_epoch: usize) -> Result<Self> {
        if n_epoch == 0 {
            return invalid("phase matrix needs at least one epoch");
        }
        Ok(Self {
            v: Array2::zeros((n_epoch, 0)),
        })
    }

    pub fn m(&self) -> usize {
        self.v.ncols()
    }

    pub fn n_epoch(&self) -> usize {
        self.v.nrows()
    }

    pub fn row(&self, n: usize) -> ArrayView1<'_, C64> {
        self.v.row(n)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.v
    }

    /// One row per epoch, one column per element, entries as phases in
    /// radians.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut header = vec!["epoch".to_string()];
        header.extend((0..self.m()).map(|j| format!("phase_{j}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = self
            .v
            .outer_iter()
            .enumerate()
            .map(|(n, row)| {
                std::iter::once(n.to_string())
                    .chain(row.iter().map(|z| sig6(z.arg())))
                    .collect()
            })
            .collect();
        write_table(w, &header, &rows)
    }
}

/// `I - a a^H / ||a||^2`.
pub fn orthogonal_projector(a: &SteeringVector) -> Result<Array2<C64>> {
    let norm2 = a.norm_sqr();
    if !(norm2 > 0.0) {
        return invalid("projector needs a nonzero steering vector");
    }
    let m = a.len();
    let e = &a.elements;
    let mut p = Array2::from_shape_fn((m, m), |(i, j)| -(e[i] * e[j].conj()) / norm2);
    for i in 0..m {
        p[[i, i]] += 1.0;
    }
    Ok(p)
}

/// Unit phasor of `z`, with the phase of zero taken as zero.
#[inline]
fn unit_phase(z: C64) -> C64 {
    if z.re == 0.0 && z.im == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        C64::from_polar(1.0, z.arg())
    }
}

/// Projects a standard complex Gaussian draw `Gamma` (`M x N_epoch`) and keeps
/// the phase: `V = exp(j angle(Gamma^T P))`.
///
/// Each row of `Gamma^T P` is a combination of projector rows, so before
/// the phase step `V a = Gamma^T P a = 0` for the vector `a` that defines
/// the projector.
pub fn phase_extract(projector: &Array2<C64>, n_epoch: usize, seed: u64) -> Result<PhaseMatrix> {
    let (m, m2) = projector.dim();
    if m != m2 {
        return Err(Error::DimensionMismatch {
            what: "projector must be square",
            expected: m,
            got: m2,
        });
    }
    if m == 0 || n_epoch == 0 {
        return invalid("phase extraction needs M >= 1 and N_epoch >= 1");
    }
    let mut rng = rng::substream(seed, &[stream::PHASES]);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // column-major draw order: one column of Gamma per epoch
    let mut gamma_t = Array2::<C64>::zeros((n_epoch, m));
    for n in 0..n_epoch {
        for i in 0..m {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            gamma_t[[n, i]] = C64::new(re, im) * scale;
        }
    }
    let v = gamma_t.dot(projector).mapv(unit_phase);
    Ok(PhaseMatrix { v })
}

/// Full RIS design for an AP at `theta_ap_ris` degrees.
pub fn build_ris_matrix(theta_ap_ris: f64, m: usize, n_epoch: usize, seed: u64) -> Result<PhaseMatrix> {
    if m < 2 {
        return invalid(format!("RIS needs at least 2 elements, got {m}"));
    }
    let a = steering_vector(theta_ap_ris, m, HALF_WAVELENGTH)?;
    let p = orthogonal_projector(&a)?;
    phase_extract(&p, n_epoch, seed)
}
