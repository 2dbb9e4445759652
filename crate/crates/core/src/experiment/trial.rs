use super::{Algorithm, ExperimentConfig, TrialResult};
use crate::beamformer::{beamform, compute_weights};
use crate::error::{Error, Result};
use crate::nlms::{
    batch_spectrum_with, detect_peaks, normalize_spectrum, sequential_spectrum_with, Detection,
    ScanManifold, Spectrum,
};
use crate::ris::{build_ris_matrix, PhaseMatrix};
use crate::rng::{self, stream};
use crate::scene::{calibrate_noise, generate_waveform, simulate_campaign_with, Layout, Scene};

/// Target layout and operating SNR of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialPoint {
    pub targets: Vec<f64>,
    pub targets_pr: Vec<f64>,
    pub snr_db: f64,
}

impl TrialPoint {
    /// Uses the configured target angles.
    pub fn from_config(cfg: &ExperimentConfig, snr_db: f64) -> Self {
        Self::with_targets(cfg, cfg.targets.clone(), snr_db)
    }

    /// PR-side angles follow `cfg.targets_pr` when its length matches,
    /// otherwise they equal the RIS-side angles.
    pub fn with_targets(cfg: &ExperimentConfig, targets: Vec<f64>, snr_db: f64) -> Self {
        let targets_pr = match &cfg.targets_pr {
            Some(pr) if pr.len() == targets.len() => pr.clone(),
            _ => targets.clone(),
        };
        Self {
            targets,
            targets_pr,
            snr_db,
        }
    }
}

/// Spectrum and detections of one algorithm. `spectrum` is `None` when the
/// filter produced no usable output (zero or non-finite power); the
/// detection is then empty.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmOutput {
    pub algorithm: Algorithm,
    pub spectrum: Option<Spectrum>,
    pub detection: Detection,
}

/// Runs the full chain for one trial and returns one output per configured
/// algorithm. The scene, waveform, RIS phases and noise are all derived from
/// `seed`, and none of them depends on `m` except through its size, so
/// different RIS sizes see common random numbers.
pub fn run_spectrum(cfg: &ExperimentConfig, point: &TrialPoint, m: usize, seed: u64) -> Result<Vec<AlgorithmOutput>> {
    if m == 1 {
        return Err(Error::InvalidArgument("a RIS needs at least 2 elements".into()));
    }
    let layout = Layout {
        targets_ris: point.targets.clone(),
        targets_pr: point.targets_pr.clone(),
        theta_ap_ris: cfg.theta_ap_ris,
        theta_ris_pr: cfg.theta_ris_pr,
        theta_ap_pr: cfg.theta_ap_pr,
        ris_elements: m,
        pr_antennas: cfg.pr_antennas,
    };
    let mut scene = Scene::draw(&layout, &cfg.paths, &mut rng::substream(seed, &[stream::SCENE]))?;
    let phases = if m > 0 {
        build_ris_matrix(cfg.theta_ap_ris, m, cfg.n_epoch, seed)?
    } else {
        PhaseMatrix::no_ris(cfg.n_epoch)?
    };
    let waveform = generate_waveform(cfg.snapshots + scene.max_delay(), cfg.waveform, seed)?;
    scene.noise_power = calibrate_noise(&scene, &phases, &waveform, cfg.snapshots, point.snr_db)?;
    let cube = simulate_campaign_with(&scene, &phases, &waveform, cfg.snapshots, seed)?;

    let grid = &cfg.nlms.grid;
    let (data, manifold) = if m > 0 {
        let w = compute_weights(cfg.theta_ris_pr, cfg.pr_antennas)?;
        (beamform(&cube, &w)?.z, ScanManifold::ris(&phases, grid)?)
    } else {
        // baseline: the PR array alone, each snapshot stacking all epochs
        // the way the RIS path stacks its beamformed outputs
        (
            cube.stack_epochs(),
            ScanManifold::array_repeated(cfg.pr_antennas, scene.pr_spacing, grid, cfg.n_epoch)?,
        )
    };

    cfg.algorithms
        .iter()
        .map(|&algorithm| {
            let raw = match algorithm {
                Algorithm::Batch => batch_spectrum_with(data.view(), &manifold, &cfg.nlms)?,
                Algorithm::Sequential => sequential_spectrum_with(data.view(), &manifold, &cfg.nlms)?
                    .pop()
                    .expect("at least one epoch"),
            };
            let spectrum = normalize_spectrum(&raw).ok();
            let detection = spectrum
                .as_ref()
                .map(|s| detect_peaks(s, cfg.nlms.peak_threshold))
                .unwrap_or_default();
            Ok(AlgorithmOutput {
                algorithm,
                spectrum,
                detection,
            })
        })
        .collect()
}

/// One scored trial per configured algorithm.
pub fn run_trial_point(cfg: &ExperimentConfig, point: &TrialPoint, m: usize, seed: u64) -> Result<Vec<TrialResult>> {
    let truth = cfg.truth_for(m, &point.targets, &point.targets_pr);
    Ok(run_spectrum(cfg, point, m, seed)?
        .into_iter()
        .map(|o| {
            TrialResult::new(
                m,
                o.algorithm,
                point.snr_db,
                truth.clone(),
                o.detection.angles,
                cfg.nlms.grid.step(),
            )
        })
        .collect())
}

/// Single trial at `snr_db` with the configured targets, the first listed
/// RIS size and the first listed algorithm.
pub fn run_trial(cfg: &ExperimentConfig, snr_db: f64, seed: u64) -> Result<TrialResult> {
    cfg.validate()?;
    let point = TrialPoint::from_config(cfg, snr_db);
    let mut out = run_trial_point(cfg, &point, cfg.ris_elements[0], seed)?;
    Ok(out.swap_remove(0))
}
