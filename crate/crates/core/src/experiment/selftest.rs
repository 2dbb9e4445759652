//! Quick internal consistency checks run by `rispr selftest`.

use ndarray::Array2;

use super::{run_spectrum, Algorithm, ExperimentConfig, TrialPoint};
use crate::array::{steering_vector, AngleGrid};
use crate::beamformer::compute_weights;
use crate::nlms::{batch_spectrum_with, ScanManifold};
use crate::ris::{build_ris_matrix, orthogonal_projector};
use crate::C64;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn projector_nulls_ap() -> Check {
    let a = steering_vector(-10.0, 16, 0.5).expect("valid angle");
    let p = orthogonal_projector(&a).expect("nonzero vector");
    let r = p.dot(&a.elements).iter().map(|x| x.norm()).fold(0.0, f64::max);
    check("projector nulls the AP direction", r < 1e-10, format!("max |P a| = {r:.2e}"))
}

fn phases_unit_modulus() -> Check {
    let v = build_ris_matrix(-10.0, 16, 50, 7).expect("valid RIS");
    let dev = v.matrix().iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max);
    check("RIS phases are unit modulus", dev < 1e-12, format!("max deviation {dev:.2e}"))
}

fn beamformer_distortionless() -> Check {
    let w = compute_weights(-40.0, 8).expect("valid angle");
    let r = w.response(-40.0);
    let err = (r - C64::new(1.0, 0.0)).norm();
    check("beamformer has unit gain at the RIS", err < 1e-12, format!("|w^H a - 1| = {err:.2e}"))
}

fn zero_data_zero_spectrum() -> Check {
    let grid = AngleGrid::new(-90.0, 90.0, 1.0).expect("valid grid");
    let v = build_ris_matrix(-10.0, 8, 10, 3).expect("valid RIS");
    let manifold = ScanManifold::ris(&v, &grid).expect("matching grid");
    let cfg = crate::nlms::NlmsConfig {
        grid,
        ..Default::default()
    };
    let z = Array2::<C64>::zeros((10, 5));
    let max = batch_spectrum_with(z.view(), &manifold, &cfg)
        .map(|s| s.p.iter().copied().fold(0.0, f64::max))
        .unwrap_or(f64::NAN);
    check("zero data gives a zero spectrum", max == 0.0, format!("max power {max}"))
}

fn noiseless_localization() -> Check {
    let cfg = ExperimentConfig {
        targets: vec![20.0],
        ris_elements: vec![64],
        n_epoch: 100,
        snapshots: 50,
        algorithms: vec![Algorithm::Batch, Algorithm::Sequential],
        ..Default::default()
    };
    let point = TrialPoint::from_config(&cfg, 100.0);
    match run_spectrum(&cfg, &point, 64, 11) {
        Ok(out) => {
            let ok = out.iter().all(|o| o.detection.angles == cfg.targets);
            let found: Vec<String> = out
                .iter()
                .map(|o| format!("{}: {:?}", o.algorithm, o.detection.angles))
                .collect();
            check("high-SNR trial finds the target", ok, found.join("; "))
        }
        Err(e) => check("high-SNR trial finds the target", false, e.to_string()),
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        projector_nulls_ap(),
        phases_unit_modulus(),
        beamformer_distortionless(),
        zero_data_zero_spectrum(),
        noiseless_localization(),
    ]
}
