//! NLMS pseudo-spectrum estimators and peak detection.
//!
//! Both estimators scan a grid of candidate angles. For a candidate `theta`
//! the reference signal at snapshot `l` is the delay-and-sum output
//! `a^H(theta) V^H z_l`, where `V a(theta)` acts as the steering vector of the
//! virtual array spanned by the epochs. An NLMS filter is trained to
//! reproduce that reference from the raw snapshots; the energy the trained
//! filter retains is large only when `V a(theta)` lies in the signal
//! subspace, so peaks of the spectrum mark target directions.
//!
//! The batch form normalizes its step by `||z_l||`; the sequential form
//! normalizes by the squared norm of the column prefix observed so far. The
//! two normalizations differ on purpose and are kept as they are.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::array::{fill_steering, AngleGrid, HALF_WAVELENGTH};
use crate::beamformer::BeamformedData;
use crate::csv::{sig6, write_table};
use crate::error::{invalid, Error, Result};
use crate::ris::PhaseMatrix;
use crate::C64;

/// Batch step. The batch update is normalized by `||z_l||`, not its square,
/// so the effective relaxation is `mu ||z_l||` and must stay below 2.
pub const DEFAULT_MU_BATCH: f64 = 0.0005;
/// Sequential step; its normalization is scale free.
pub const DEFAULT_MU_SEQUENTIAL: f64 = 0.1;
pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NlmsConfig {
    /// Step size of the batch estimator.
    pub mu_batch: f64,
    /// Step size of the sequential estimator.
    pub mu_sequential: f64,
    pub grid: AngleGrid,
    /// Peak threshold on the normalized spectrum, in (0, 1).
    pub peak_threshold: f64,
    /// Added to the step normalizer so all-zero snapshots are harmless.
    pub epsilon_norm: f64,
}

impl NlmsConfig {
    pub fn new(
        mu_batch: f64,
        mu_sequential: f64,
        grid: AngleGrid,
        peak_threshold: f64,
        epsilon_norm: f64,
    ) -> Result<Self> {
        let cfg = Self {
            mu_batch,
            mu_sequential,
            grid,
            peak_threshold,
            epsilon_norm,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for mu in [self.mu_batch, self.mu_sequential] {
            if !(mu.is_finite() && mu > 0.0) {
                return invalid(format!("step size {mu} must be positive"));
            }
        }
        if !(self.peak_threshold > 0.0 && self.peak_threshold < 1.0) {
            return invalid(format!("peak threshold {} must lie in (0, 1)", self.peak_threshold));
        }
        if !(self.epsilon_norm.is_finite() && self.epsilon_norm > 0.0) {
            return invalid("normalization epsilon must be positive");
        }
        Ok(())
    }
}

impl Default for NlmsConfig {
    fn default() -> Self {
        Self {
            mu_batch: DEFAULT_MU_BATCH,
            mu_sequential: DEFAULT_MU_SEQUENTIAL,
            grid: AngleGrid::standard(),
            peak_threshold: DEFAULT_THRESHOLD,
            epsilon_norm: DEFAULT_EPSILON,
        }
    }
}

/// Pseudo-spectrum sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: AngleGrid,
    pub p: Vec<f64>,
    pub normalized: bool,
}

impl Spectrum {
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.p.iter().enumerate() {
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn argmax_angle(&self) -> Option<f64> {
        self.argmax().map(|i| self.grid.values()[i])
    }

    /// Two columns: angle in degrees and (normalized) power.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let rows: Vec<Vec<String>> = self
            .grid
            .values()
            .iter()
            .zip(&self.p)
            .map(|(a, p)| vec![sig6(*a), sig6(*p)])
            .collect();
        let col = if self.normalized { "normalized_power" } else { "power" };
        write_table(w, &["angle_deg", col], &rows)
    }
}

/// Detected target directions, ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Detection {
    pub angles: Vec<f64>,
}

impl Detection {
    pub fn k_hat(&self) -> usize {
        self.angles.len()
    }
}

/// Reference steering vectors of the scan, one column per grid angle.
///
/// With a RIS the column for `theta` is `V a_M(theta)` (length `N_epoch`).
/// Without one the PR array is scanned directly and the column is the PR
/// steering vector itself, i.e. `V` is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanManifold {
    /// `G x N` with row `g` holding the reference vector of grid angle `g`.
    rows: Array2<C64>,
}

impl ScanManifold {
    pub fn ris(phases: &PhaseMatrix, grid: &AngleGrid) -> Result<Self> {
        let m = phases.m();
        if m == 0 {
            return invalid("RIS scan needs a phase matrix with at least one element");
        }
        let v = phases.matrix();
        let mut a = vec![C64::new(0.0, 0.0); m];
        let mut rows = Array2::zeros((grid.len(), phases.n_epoch()));
        for (g, &theta) in grid.values().iter().enumerate() {
            fill_steering(theta, HALF_WAVELENGTH, &mut a);
            for (n, vrow) in v.outer_iter().enumerate() {
                rows[[g, n]] = vrow.iter().zip(&a).map(|(x, y)| x * y).sum();
            }
        }
        Ok(Self { rows })
    }

    pub fn array(n_elements: usize, spacing: f64, grid: &AngleGrid) -> Result<Self> {
        if n_elements == 0 {
            return invalid("array scan needs at least one element");
        }
        let mut rows = Array2::zeros((grid.len(), n_elements));
        for (g, &theta) in grid.values().iter().enumerate() {
            fill_steering(theta, spacing, rows.row_mut(g).as_slice_mut().expect("row-major"));
        }
        Ok(Self { rows })
    }

    /// Array manifold tiled `repeats` times, matching data that stacks
    /// `repeats` observations of the same array into one column.
    pub fn array_repeated(n_elements: usize, spacing: f64, grid: &AngleGrid, repeats: usize) -> Result<Self> {
        if repeats == 0 {
            return invalid("array scan needs at least one repeat");
        }
        let single = Self::array(n_elements, spacing, grid)?;
        let mut rows = Array2::zeros((grid.len(), n_elements * repeats));
        for r in 0..repeats {
            rows.slice_mut(ndarray::s![.., r * n_elements..(r + 1) * n_elements]).assign(&single.rows);
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: Array2<C64>) -> Self {
        Self { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }
}

fn check_inputs(data: &ArrayView2<C64>, manifold: &ScanManifold, cfg: &NlmsConfig) -> Result<()> {
    cfg.validate()?;
    if data.nrows() != manifold.dim() {
        return Err(Error::DimensionMismatch {
            what: "data rows vs scan manifold",
            expected: manifold.dim(),
            got: data.nrows(),
        });
    }
    if manifold.len() != cfg.grid.len() {
        return Err(Error::DimensionMismatch {
            what: "scan manifold vs grid",
            expected: cfg.grid.len(),
            got: manifold.len(),
        });
    }
    if data.ncols() == 0 || data.nrows() == 0 {
        return invalid("empty data matrix");
    }
    Ok(())
}

/// Batch NLMS over the snapshot columns of `data` (`N x L`).
pub fn batch_spectrum_with(data: ArrayView2<C64>, manifold: &ScanManifold, cfg: &NlmsConfig) -> Result<Spectrum> {
    check_inputs(&data, manifold, cfg)?;
    // snapshot-major copy so that each z_l is contiguous
    let zt = data.t().as_standard_layout().into_owned();
    let n = zt.ncols();
    let steps: Vec<f64> = zt
        .outer_iter()
        .map(|z| cfg.mu_batch / (z.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt() + cfg.epsilon_norm))
        .collect();
    let zs = zt.as_slice().expect("standard layout");
    let bs = manifold.rows.as_slice().expect("standard layout");

    let p: Vec<f64> = (0..manifold.len())
        .into_par_iter()
        .map(|g| {
            let b = &bs[g * n..(g + 1) * n];
            let mut est = vec![C64::new(0.0, 0.0); n];
            for (l, step) in steps.iter().enumerate() {
                let z = &zs[l * n..(l + 1) * n];
                // e = p_l - est^H z_l with p_l = b^H z_l
                let mut e = C64::new(0.0, 0.0);
                for i in 0..n {
                    e += (b[i] - est[i]).conj() * z[i];
                }
                let c = e.conj() * *step;
                for i in 0..n {
                    est[i] += c * z[i];
                }
            }
            est.iter().map(|x| x.norm_sqr()).sum()
        })
        .collect();
    Ok(Spectrum {
        grid: cfg.grid.clone(),
        p,
        normalized: false,
    })
}

/// Sequential NLMS: one running spectrum per row (epoch) of `data`.
pub fn sequential_spectrum_with(
    data: ArrayView2<C64>,
    manifold: &ScanManifold,
    cfg: &NlmsConfig,
) -> Result<Vec<Spectrum>> {
    check_inputs(&data, manifold, cfg)?;
    let z = data.as_standard_layout().into_owned();
    let (n_ep, l) = z.dim();
    // running squared norms of the column prefixes Z[0..=n, l]
    let mut prefix = Array2::<f64>::zeros((n_ep, l));
    for li in 0..l {
        let mut acc = 0.0;
        for n in 0..n_ep {
            acc += z[[n, li]].norm_sqr();
            prefix[[n, li]] = acc;
        }
    }
    let steps = prefix.mapv(|s| cfg.mu_sequential / (s + cfg.epsilon_norm));
    let zs = z.as_slice().expect("standard layout");
    let ss = steps.as_slice().expect("standard layout");
    let dim = manifold.dim();
    let bs = manifold.rows.as_slice().expect("standard layout");

    let per_angle: Vec<Vec<f64>> = (0..manifold.len())
        .into_par_iter()
        .map(|g| {
            let b = &bs[g * dim..(g + 1) * dim];
            let mut d = vec![C64::new(0.0, 0.0); l];
            let mut power = 0.0;
            let mut history = Vec::with_capacity(n_ep);
            for n in 0..n_ep {
                let c = b[n].conj();
                let row = &zs[n * l..(n + 1) * l];
                let srow = &ss[n * l..(n + 1) * l];
                let mut p = C64::new(0.0, 0.0);
                for li in 0..l {
                    let zz = row[li];
                    d[li] += c * zz;
                    p += (d[li] - p.conj() * zz).conj() * zz * srow[li];
                }
                power += p.norm_sqr();
                history.push(power);
            }
            history
        })
        .collect();

    Ok((0..n_ep)
        .map(|n| Spectrum {
            grid: cfg.grid.clone(),
            p: per_angle.iter().map(|h| h[n]).collect(),
            normalized: false,
        })
        .collect())
}

fn check_phase_rows(z: &BeamformedData, phases: &PhaseMatrix) -> Result<()> {
    if z.n_epoch() != phases.n_epoch() {
        return Err(Error::DimensionMismatch {
            what: "beamformed epochs vs phase matrix rows",
            expected: phases.n_epoch(),
            got: z.n_epoch(),
        });
    }
    Ok(())
}

/// Batch NLMS localization over the beamformed data `Z` and RIS phases `V`.
pub fn batch_spectrum(z: &BeamformedData, phases: &PhaseMatrix, cfg: &NlmsConfig) -> Result<Spectrum> {
    check_phase_rows(z, phases)?;
    let manifold = ScanManifold::ris(phases, &cfg.grid)?;
    batch_spectrum_with(z.z.view(), &manifold, cfg)
}

/// Sequential NLMS; spectrum `n` uses epochs `0..=n`.
pub fn sequential_spectrum(z: &BeamformedData, phases: &PhaseMatrix, cfg: &NlmsConfig) -> Result<Vec<Spectrum>> {
    check_phase_rows(z, phases)?;
    let manifold = ScanManifold::ris(phases, &cfg.grid)?;
    sequential_spectrum_with(z.z.view(), &manifold, cfg)
}

/// Scales the spectrum so that its maximum is 1.
pub fn normalize_spectrum(p: &Spectrum) -> Result<Spectrum> {
    if p.p.iter().any(|v| !v.is_finite()) {
        return invalid("spectrum has non-finite values (diverged filter)");
    }
    let max = p.p.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::NoEnergy);
    }
    Ok(Spectrum {
        grid: p.grid.clone(),
        p: p.p.iter().map(|v| v / max).collect(),
        normalized: true,
    })
}

/// Grid angles that are local maxima with value `>= phi`.
///
/// A run of equal values counts as one peak located at the centre of the
/// run (lower centre for even runs). Grid endpoints only need to exceed
/// their single neighbour. The threshold is applied to the values as given,
/// so the spectrum is expected to be normalized.
pub fn detect_peaks(p: &Spectrum, phi: f64) -> Detection {
    let v = &p.p;
    let grid = p.grid.values();
    let mut angles = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let left = if i == 0 { f64::NEG_INFINITY } else { v[i - 1] };
        let right = if j + 1 == v.len() { f64::NEG_INFINITY } else { v[j + 1] };
        if v[i] > left && v[i] > right && v[i] >= phi {
            angles.push(grid[(i + j) / 2]);
        }
        i = j + 1;
    }
    Detection { angles }
}
