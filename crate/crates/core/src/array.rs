//! Uniform linear array manifolds for the RIS and the PR.
//!
//! Element `m` (0-based) of the steering vector towards `theta` is
//! `exp(j 2 pi d m sin(theta))`, with `d` the element spacing in wavelengths
//! and the phase reference at element 0. The same convention is used when
//! simulating data and when scanning the estimator grid.

use ndarray::{Array1, Array2};

use crate::error::{invalid, Result};
use crate::C64;

/// Half-wavelength spacing used for both arrays unless stated otherwise.
pub const HALF_WAVELENGTH: f64 = 0.5;

const ANGLE_SLACK: f64 = 1e-9;

/// Ordered grid of scan angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    start: f64,
    stop: f64,
    step: f64,
    values: Vec<f64>,
}

impl AngleGrid {
    /// Uniform grid `start, start + step, ..., stop`.
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return invalid("grid bounds must be finite");
        }
        if start >= stop {
            return invalid(format!("grid start {start} must be below stop {stop}"));
        }
        if step <= 0.0 {
            return invalid(format!("grid step {step} must be positive"));
        }
        let span = (stop - start) / step;
        let n = (span + 1e-9).floor() as usize;
        let mut values: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
        // pin the endpoint so the grid spans [start, stop] even when the
        // step does not divide the interval
        if (values[n] - stop).abs() > 1e-9 * step.max(1.0) {
            values.push(stop);
        } else {
            values[n] = stop;
        }
        Ok(Self {
            start,
            stop,
            step,
            values,
        })
    }

    /// Grid from explicit, strictly increasing angles. `step` is reported as
    /// the smallest spacing.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return invalid("explicit grid needs at least two angles");
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("grid angles must be finite");
        }
        let mut step = f64::INFINITY;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            if d <= 0.0 {
                return invalid("grid angles must be strictly increasing");
            }
            step = step.min(d);
        }
        Ok(Self {
            start: values[0],
            stop: values[values.len() - 1],
            step,
            values,
        })
    }

    /// `[-90, 90]` in half-degree steps.
    pub fn standard() -> Self {
        Self::new(-90.0, 90.0, 0.5).expect("static grid")
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the grid point closest to `angle` (ties go to the lower index).
    pub fn nearest_index(&self, angle: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.values.iter().enumerate() {
            let d = (v - angle).abs();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

impl Default for AngleGrid {
    fn default() -> Self {
        Self::standard()
    }
}

/// Array response towards a single direction.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub angle: f64,
    pub elements: Array1<C64>,
}

impl SteeringVector {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub(crate) fn check_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() {
        return invalid(format!("angle {theta} is not finite"));
    }
    if theta.abs() > 90.0 + ANGLE_SLACK {
        return invalid(format!("angle {theta} deg outside [-90, 90]"));
    }
    Ok(())
}

/// Phase progression per element, in radians.
#[inline]
fn phase_step(theta_deg: f64, spacing: f64) -> f64 {
    2.0 * std::f64::consts::PI * spacing * theta_deg.to_radians().sin()
}

/// Writes the ULA response into `out`; no validation.
#[inline]
pub(crate) fn fill_steering(theta_deg: f64, spacing: f64, out: &mut [C64]) {
    let k = phase_step(theta_deg, spacing);
    for (m, e) in out.iter_mut().enumerate() {
        *e = C64::from_polar(1.0, k * m as f64);
    }
}

pub fn steering_vector(theta: f64, n_elements: usize, spacing_wavelengths: f64) -> Result<SteeringVector> {
    if n_elements == 0 {
        return invalid("steering vector needs at least one element");
    }
    check_angle(theta)?;
    if !spacing_wavelengths.is_finite() || spacing_wavelengths <= 0.0 {
        return invalid(format!("element spacing {spacing_wavelengths} must be positive"));
    }
    let mut elements = Array1::zeros(n_elements);
    fill_steering(theta, spacing_wavelengths, elements.as_slice_mut().expect("contiguous"));
    Ok(SteeringVector { angle: theta, elements })
}

/// Stacks steering vectors column-wise into an `n_elements x K` manifold.
pub fn steering_matrix(angles: &[f64], n_elements: usize, spacing_wavelengths: f64) -> Result<Array2<C64>> {
    if angles.is_empty() {
        return invalid("steering matrix needs at least one angle");
    }
    let mut out = Array2::zeros((n_elements, angles.len()));
    for (k, &theta) in angles.iter().enumerate() {
        let a = steering_vector(theta, n_elements, spacing_wavelengths)?;
        out.column_mut(k).assign(&a.elements);
    }
    Ok(out)
}
