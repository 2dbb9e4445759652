//! Multipath received-signal model at the passive radar.
//!
//! A single-antenna AP broadcasts `s(t)`. Every target reflects it towards the
//! RIS (gain `alpha_k`) and towards the PR (gain `rho_k`); the AP also reaches
//! the RIS directly (`alpha_0`) and the PR directly (`rho_ap_pr`). During
//! epoch `n` the RIS re-radiates `x_n(t) = v_n^T r(t)` towards the PR with
//! gain `rho_ris_pr`. Delays are integer sample shifts of the waveform and
//! every epoch observes the same transmitted samples, so only the RIS
//! configuration and the noise change from epoch to epoch.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{check_angle, fill_steering, HALF_WAVELENGTH};
use crate::error::{invalid, Error, Result};
use crate::kv::{format_gain, KvDoc};
use crate::ris::PhaseMatrix;
use crate::rng::{self, stream};
use crate::C64;

/// One reflecting target.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    /// Angle of the target as seen from the RIS, degrees.
    pub theta_ris: f64,
    /// Angle of the target as seen from the PR, degrees.
    pub theta_pr: f64,
    /// AP -> target -> RIS gain.
    pub alpha: C64,
    /// AP -> target -> PR gain.
    pub rho: C64,
    /// AP -> target delay, samples.
    pub delay_ap: usize,
    /// target -> RIS delay, samples.
    pub delay_ris: usize,
    /// target -> PR delay, samples.
    pub delay_pr: usize,
}

/// Ground-truth geometry, gains and noise level of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub targets: Vec<Target>,
    pub theta_ap_ris: f64,
    pub theta_ris_pr: f64,
    pub theta_ap_pr: f64,
    pub alpha0: C64,
    pub rho_ap_pr: C64,
    pub rho_ris_pr: C64,
    pub delay_ap_ris: usize,
    pub delay_ris_pr: usize,
    pub delay_ap_pr: usize,
    /// Per-antenna variance of the complex noise.
    pub noise_power: f64,
    /// RIS element count `M`; zero means no RIS is deployed.
    pub ris_elements: usize,
    /// PR antenna count `N_PR`.
    pub pr_antennas: usize,
    pub ris_spacing: f64,
    pub pr_spacing: f64,
}

impl Scene {
    /// Scene with no targets and all gains zero.
    pub fn empty(ris_elements: usize, pr_antennas: usize) -> Self {
        Self {
            targets: Vec::new(),
            theta_ap_ris: 0.0,
            theta_ris_pr: 0.0,
            theta_ap_pr: 0.0,
            alpha0: C64::new(0.0, 0.0),
            rho_ap_pr: C64::new(0.0, 0.0),
            rho_ris_pr: C64::new(0.0, 0.0),
            delay_ap_ris: 0,
            delay_ris_pr: 0,
            delay_ap_pr: 0,
            noise_power: 0.0,
            ris_elements,
            pr_antennas,
            ris_spacing: HALF_WAVELENGTH,
            pr_spacing: HALF_WAVELENGTH,
        }
    }

    pub fn k(&self) -> usize {
        self.targets.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.pr_antennas == 0 {
            return invalid("PR needs at least one antenna");
        }
        for t in &self.targets {
            check_angle(t.theta_ris)?;
            check_angle(t.theta_pr)?;
        }
        check_angle(self.theta_ap_ris)?;
        check_angle(self.theta_ris_pr)?;
        check_angle(self.theta_ap_pr)?;
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return invalid(format!("noise power {} must be finite and >= 0", self.noise_power));
        }
        for s in [self.ris_spacing, self.pr_spacing] {
            if !(s.is_finite() && s > 0.0) {
                return invalid("element spacing must be positive");
            }
        }
        Ok(())
    }

    /// Largest delay, counted at the RIS input, of any path feeding the RIS.
    pub fn max_ris_delay(&self) -> usize {
        self.targets
            .iter()
            .map(|t| t.delay_ap + t.delay_ris)
            .chain(std::iter::once(self.delay_ap_ris))
            .max()
            .unwrap_or(0)
    }

    /// Largest total delay of any path reaching the PR.
    pub fn max_delay(&self) -> usize {
        let via_ris = self.max_ris_delay() + self.delay_ris_pr;
        self.targets
            .iter()
            .map(|t| t.delay_ap + t.delay_pr)
            .chain([via_ris, self.delay_ap_pr])
            .max()
            .unwrap_or(0)
    }

    /// Same scene with the gain of every path multiplied by `c`. The RIS
    /// relay gain `rho_ris_pr` is shared by all RIS paths and is left alone,
    /// so the noise-free output scales by exactly `c`.
    pub fn scaled_gains(&self, c: C64) -> Self {
        let mut s = self.clone();
        for t in &mut s.targets {
            t.alpha *= c;
            t.rho *= c;
        }
        s.alpha0 *= c;
        s.rho_ap_pr *= c;
        s
    }
}

/// Gain magnitudes and delay bound used when drawing random scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathProfile {
    pub target_ris_gain: f64,
    pub target_pr_gain: f64,
    pub ap_ris_gain: f64,
    pub ris_pr_gain: f64,
    pub ap_pr_gain: f64,
    /// Every path delay is uniform on `0..=max_delay` samples.
    pub max_delay: usize,
}

impl Default for PathProfile {
    fn default() -> Self {
        Self {
            target_ris_gain: 1.0,
            target_pr_gain: 4.0,
            ap_ris_gain: 1.0,
            ris_pr_gain: 1.0,
            ap_pr_gain: 0.0,
            max_delay: 10,
        }
    }
}

/// Fixed geometry from which random scenes are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub targets_ris: Vec<f64>,
    pub targets_pr: Vec<f64>,
    pub theta_ap_ris: f64,
    pub theta_ris_pr: f64,
    pub theta_ap_pr: f64,
    pub ris_elements: usize,
    pub pr_antennas: usize,
}

impl Scene {
    /// Draws gain phases (uniform) and delays (uniform) for `layout`.
    pub fn draw(layout: &Layout, profile: &PathProfile, rng: &mut rng::Rng) -> Result<Self> {
        if layout.targets_ris.len() != layout.targets_pr.len() {
            return Err(Error::DimensionMismatch {
                what: "target PR angles",
                expected: layout.targets_ris.len(),
                got: layout.targets_pr.len(),
            });
        }
        let phase = |mag: f64, rng: &mut rng::Rng| {
            C64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU))
        };
        let delay = |rng: &mut rng::Rng| rng.gen_range(0..=profile.max_delay);
        let mut scene = Scene::empty(layout.ris_elements, layout.pr_antennas);
        for (&theta_ris, &theta_pr) in layout.targets_ris.iter().zip(&layout.targets_pr) {
            let alpha = phase(profile.target_ris_gain, rng);
            let rho = phase(profile.target_pr_gain, rng);
            scene.targets.push(Target {
                theta_ris,
                theta_pr,
                alpha,
                rho,
                delay_ap: delay(rng),
                delay_ris: delay(rng),
                delay_pr: delay(rng),
            });
        }
        scene.theta_ap_ris = layout.theta_ap_ris;
        scene.theta_ris_pr = layout.theta_ris_pr;
        scene.theta_ap_pr = layout.theta_ap_pr;
        scene.alpha0 = phase(profile.ap_ris_gain, rng);
        scene.rho_ap_pr = phase(profile.ap_pr_gain, rng);
        scene.rho_ris_pr = phase(profile.ris_pr_gain, rng);
        scene.delay_ap_ris = delay(rng);
        scene.delay_ris_pr = delay(rng);
        scene.delay_ap_pr = delay(rng);
        scene.validate()?;
        Ok(scene)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveformKind {
    /// Random QPSK symbols on the unit circle.
    Qpsk,
    /// Circular complex Gaussian samples, rescaled to unit sample power.
    Gaussian,
}

impl std::str::FromStr for WaveformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Self::Qpsk),
            "gaussian" => Ok(Self::Gaussian),
            other => Err(Error::Config(format!("unknown waveform `{other}`"))),
        }
    }
}

impl std::fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Qpsk => "qpsk",
            Self::Gaussian => "gaussian",
        })
    }
}

/// Baseband AP signal `s(t)` with unit average power.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub kind: WaveformKind,
    samples: Vec<C64>,
}

impl Waveform {
    /// Wraps arbitrary samples (used by tests and custom signals).
    pub fn from_samples(kind: WaveformKind, samples: Vec<C64>) -> Result<Self> {
        if samples.is_empty() {
            return invalid("waveform must not be empty");
        }
        Ok(Self { kind, samples })
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    #[inline]
    fn at(&self, t: usize, delay: usize) -> C64 {
        self.samples[t - delay]
    }
}

pub fn generate_waveform(length: usize, kind: WaveformKind, seed: u64) -> Result<Waveform> {
    if length == 0 {
        return invalid("waveform length must be at least 1");
    }
    let mut rng = rng::substream(seed, &[stream::WAVEFORM]);
    let samples = match kind {
        WaveformKind::Qpsk => {
            let base = std::f64::consts::FRAC_PI_4;
            (0..length)
                .map(|_| {
                    let q = rng.gen_range(0..4u8) as f64;
                    C64::from_polar(1.0, base + q * std::f64::consts::FRAC_PI_2)
                })
                .collect()
        }
        WaveformKind::Gaussian => {
            let mut s: Vec<C64> = (0..length)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect();
            let p = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / length as f64;
            let g = if p > 0.0 { p.sqrt().recip() } else { 1.0 };
            s.iter_mut().for_each(|z| *z *= g);
            s
        }
    };
    Ok(Waveform { kind, samples })
}

/// Received signal at the RIS, `r(t)`, for absolute sample index `t`.
pub fn ris_incident_signal(scene: &Scene, waveform: &Waveform, t: usize) -> Result<Array1<C64>> {
    let min = scene.max_ris_delay();
    if t < min || t >= waveform.len() {
        return Err(Error::OutOfRange {
            index: t,
            min,
            len: waveform.len(),
        });
    }
    let m = scene.ris_elements;
    let mut r = Array1::<C64>::zeros(m);
    if m == 0 {
        return Ok(r);
    }
    let mut a = vec![C64::new(0.0, 0.0); m];
    for tg in &scene.targets {
        fill_steering(tg.theta_ris, scene.ris_spacing, &mut a);
        let amp = tg.alpha * waveform.at(t, tg.delay_ap + tg.delay_ris);
        r.iter_mut().zip(&a).for_each(|(ri, ai)| *ri += ai * amp);
    }
    fill_steering(scene.theta_ap_ris, scene.ris_spacing, &mut a);
    let amp = scene.alpha0 * waveform.at(t, scene.delay_ap_ris);
    r.iter_mut().zip(&a).for_each(|(ri, ai)| *ri += ai * amp);
    Ok(r)
}

/// Received data `Y_n` (`N_PR x L`) of one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochData {
    pub epoch_index: usize,
    pub y: Array2<C64>,
}

/// Received data of a whole campaign, one matrix per epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    pub epochs: Vec<EpochData>,
}

impl DataCube {
    pub fn n_epoch(&self) -> usize {
        self.epochs.len()
    }

    pub fn pr_antennas(&self) -> usize {
        self.epochs.first().map_or(0, |e| e.y.nrows())
    }

    pub fn snapshots(&self) -> usize {
        self.epochs.first().map_or(0, |e| e.y.ncols())
    }

    /// Concatenates all epochs along the snapshot axis: `N_PR x (N_epoch L)`.
    pub fn concat_snapshots(&self) -> Array2<C64> {
        let (n, l) = (self.pr_antennas(), self.snapshots());
        let mut out = Array2::zeros((n, l * self.n_epoch()));
        for (e, ep) in self.epochs.iter().enumerate() {
            out.slice_mut(ndarray::s![.., e * l..(e + 1) * l]).assign(&ep.y);
        }
        out
    }

    /// Stacks all epochs along the antenna axis: `(N_epoch N_PR) x L`, with
    /// epoch `n` occupying rows `n N_PR..(n + 1) N_PR`.
    pub fn stack_epochs(&self) -> Array2<C64> {
        let (n, l) = (self.pr_antennas(), self.snapshots());
        let mut out = Array2::zeros((n * self.n_epoch(), l));
        for (e, ep) in self.epochs.iter().enumerate() {
            out.slice_mut(ndarray::s![e * n..(e + 1) * n, ..]).assign(&ep.y);
        }
        out
    }
}

/// Noise-free signal terms that do not depend on the RIS configuration,
/// precomputed once per campaign.
struct Synth {
    /// `r(t_l - tau_RIS^PR)` stacked as `M x L`.
    ris_input: Array2<C64>,
    /// `rho_RIS^PR a(theta_RIS^PR)`.
    ris_column: Array1<C64>,
    /// AP direct path plus target direct paths, `N_PR x L`.
    direct: Array2<C64>,
    noise_std: f64,
}

impl Synth {
    fn new(scene: &Scene, waveform: &Waveform, l: usize) -> Result<Self> {
        scene.validate()?;
        if l == 0 {
            return invalid("snapshot count L must be at least 1");
        }
        let offset = scene.max_delay();
        if waveform.len() < l + offset {
            return invalid(format!(
                "waveform has {} samples, need L + max delay = {}",
                waveform.len(),
                l + offset
            ));
        }
        let (m, n) = (scene.ris_elements, scene.pr_antennas);
        let mut ris_input = Array2::zeros((m, l));
        if m > 0 {
            for li in 0..l {
                let r = ris_incident_signal(scene, waveform, offset + li - scene.delay_ris_pr)?;
                ris_input.column_mut(li).assign(&r);
            }
        }
        let mut a = vec![C64::new(0.0, 0.0); n];
        fill_steering(scene.theta_ris_pr, scene.pr_spacing, &mut a);
        let ris_column = Array1::from_iter(a.iter().map(|x| x * scene.rho_ris_pr));

        let mut direct = Array2::zeros((n, l));
        let mut add_path = |theta: f64, gain: C64, delay: usize, direct: &mut Array2<C64>| {
            if gain == C64::new(0.0, 0.0) {
                return;
            }
            fill_steering(theta, scene.pr_spacing, &mut a);
            for li in 0..l {
                let s = gain * waveform.at(offset + li, delay);
                for (i, ai) in a.iter().enumerate() {
                    direct[[i, li]] += ai * s;
                }
            }
        };
        add_path(scene.theta_ap_pr, scene.rho_ap_pr, scene.delay_ap_pr, &mut direct);
        for t in &scene.targets {
            add_path(t.theta_pr, t.rho, t.delay_ap + t.delay_pr, &mut direct);
        }
        Ok(Self {
            ris_input,
            ris_column,
            direct,
            noise_std: (scene.noise_power / 2.0).sqrt(),
        })
    }

    fn check_row(&self, v_n: ArrayView1<C64>) -> Result<()> {
        if v_n.len() != self.ris_input.nrows() {
            return Err(Error::DimensionMismatch {
                what: "RIS phase row length",
                expected: self.ris_input.nrows(),
                got: v_n.len(),
            });
        }
        Ok(())
    }

    /// `x_n = v_n^T r` over the L snapshots.
    fn reflected(&self, v_n: ArrayView1<C64>) -> Array1<C64> {
        v_n.dot(&self.ris_input)
    }

    fn clean_epoch(&self, v_n: ArrayView1<C64>) -> Array2<C64> {
        let x = self.reflected(v_n);
        let mut y = self.direct.clone();
        for (i, ci) in self.ris_column.iter().enumerate() {
            let mut row = y.row_mut(i);
            row.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi += ci * xi);
        }
        y
    }

    fn epoch(&self, index: usize, v_n: ArrayView1<C64>, noise_seed: u64) -> Result<EpochData> {
        self.check_row(v_n)?;
        let mut y = self.clean_epoch(v_n);
        if self.noise_std > 0.0 {
            let mut rng = rng::substream(noise_seed, &[stream::NOISE]);
            for yi in y.iter_mut() {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *yi += C64::new(re, im) * self.noise_std;
            }
        }
        Ok(EpochData { epoch_index: index, y })
    }
}

/// Simulates one epoch with RIS configuration `v_n` (length `M`; empty when
/// no RIS is deployed). Snapshot `l` is taken at absolute sample
/// `scene.max_delay() + l`.
pub fn simulate_epoch(
    scene: &Scene,
    v_n: ArrayView1<C64>,
    waveform: &Waveform,
    l: usize,
    seed: u64,
) -> Result<EpochData> {
    let synth = Synth::new(scene, waveform, l)?;
    synth.epoch(0, v_n, seed)
}

fn check_phases(scene: &Scene, phases: &PhaseMatrix) -> Result<()> {
    if phases.m() != scene.ris_elements {
        return Err(Error::DimensionMismatch {
            what: "phase matrix columns vs RIS elements",
            expected: scene.ris_elements,
            got: phases.m(),
        });
    }
    if phases.n_epoch() == 0 {
        return invalid("campaign needs at least one epoch");
    }
    Ok(())
}

/// Seed of the noise substream of epoch `n`.
pub fn epoch_seed(seed: u64, n: usize) -> u64 {
    rng::derive(seed, &[stream::NOISE, n as u64])
}

/// Runs all epochs against a shared waveform.
pub fn simulate_campaign_with(
    scene: &Scene,
    phases: &PhaseMatrix,
    waveform: &Waveform,
    l: usize,
    seed: u64,
) -> Result<DataCube> {
    check_phases(scene, phases)?;
    let synth = Synth::new(scene, waveform, l)?;
    let epochs = (0..phases.n_epoch())
        .map(|n| synth.epoch(n, phases.row(n), epoch_seed(seed, n)))
        .collect::<Result<Vec<_>>>()?;
    Ok(DataCube { epochs })
}

/// Runs all epochs; the QPSK waveform is drawn from `seed`.
pub fn simulate_campaign(scene: &Scene, phases: &PhaseMatrix, l: usize, seed: u64) -> Result<DataCube> {
    let waveform = generate_waveform(l + scene.max_delay(), WaveformKind::Qpsk, seed)?;
    simulate_campaign_with(scene, phases, &waveform, l, seed)
}

/// Mean per-antenna power of the noise-free received signal, averaged over
/// all epochs of `phases` and all `l` snapshots.
pub fn signal_power(scene: &Scene, phases: &PhaseMatrix, waveform: &Waveform, l: usize) -> Result<f64> {
    check_phases(scene, phases)?;
    let synth = Synth::new(scene, waveform, l)?;
    let mut acc = 0.0;
    for n in 0..phases.n_epoch() {
        acc += synth.clean_epoch(phases.row(n)).iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    Ok(acc / (phases.n_epoch() * scene.pr_antennas * l) as f64)
}

/// Noise variance that puts the PR at `target_snr_db`, given the measured
/// signal power.
pub fn noise_for_snr(signal_power: f64, target_snr_db: f64) -> Result<f64> {
    if !(signal_power.is_finite() && signal_power > 0.0) {
        return Err(Error::ZeroSignal);
    }
    if !target_snr_db.is_finite() {
        return invalid("target SNR must be finite");
    }
    Ok(signal_power / 10f64.powf(target_snr_db / 10.0))
}

/// Noise variance for which the campaign runs at `target_snr_db`.
pub fn calibrate_noise(
    scene: &Scene,
    phases: &PhaseMatrix,
    waveform: &Waveform,
    l: usize,
    target_snr_db: f64,
) -> Result<f64> {
    noise_for_snr(signal_power(scene, phases, waveform, l)?, target_snr_db)
}

// ---- key-value serialization -------------------------------------------

const SCENE_KEYS: &[&str] = &[
    "ris_elements",
    "pr_antennas",
    "ris_spacing",
    "pr_spacing",
    "noise_power",
    "theta_ap_ris",
    "theta_ris_pr",
    "theta_ap_pr",
    "alpha0",
    "rho_ap_pr",
    "rho_ris_pr",
    "delay_ap_ris",
    "delay_ris_pr",
    "delay_ap_pr",
    "target_theta_ris",
    "target_theta_pr",
    "target_alpha",
    "target_rho",
    "target_delay_ap",
    "target_delay_ris",
    "target_delay_pr",
    "seed",
];

fn fit_len<T>(what: &'static str, k: usize, v: Option<Vec<T>>) -> Result<Vec<T>> {
    match v {
        Some(v) if v.len() != k => Err(Error::DimensionMismatch {
            what,
            expected: k,
            got: v.len(),
        }),
        Some(v) => Ok(v),
        None => Err(Error::Config(format!("missing `{what}`"))),
    }
}

impl Scene {
    /// Serializes to the documented key-value schema (angles in degrees,
    /// gains as `magnitude@phase_deg`, delays in samples).
    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.set("ris_elements", self.ris_elements.to_string());
        d.set("pr_antennas", self.pr_antennas.to_string());
        d.set("ris_spacing", self.ris_spacing.to_string());
        d.set("pr_spacing", self.pr_spacing.to_string());
        d.set("noise_power", self.noise_power.to_string());
        d.set("theta_ap_ris", self.theta_ap_ris.to_string());
        d.set("theta_ris_pr", self.theta_ris_pr.to_string());
        d.set("theta_ap_pr", self.theta_ap_pr.to_string());
        d.set("alpha0", format_gain(self.alpha0));
        d.set("rho_ap_pr", format_gain(self.rho_ap_pr));
        d.set("rho_ris_pr", format_gain(self.rho_ris_pr));
        d.set("delay_ap_ris", self.delay_ap_ris.to_string());
        d.set("delay_ris_pr", self.delay_ris_pr.to_string());
        d.set("delay_ap_pr", self.delay_ap_pr.to_string());
        if !self.targets.is_empty() {
            let col = |f: &dyn Fn(&Target) -> String| {
                self.targets.iter().map(f).collect::<Vec<_>>().join(", ")
            };
            d.set("target_theta_ris", col(&|t| t.theta_ris.to_string()));
            d.set("target_theta_pr", col(&|t| t.theta_pr.to_string()));
            d.set("target_alpha", col(&|t| format_gain(t.alpha)));
            d.set("target_rho", col(&|t| format_gain(t.rho)));
            d.set("target_delay_ap", col(&|t| t.delay_ap.to_string()));
            d.set("target_delay_ris", col(&|t| t.delay_ris.to_string()));
            d.set("target_delay_pr", col(&|t| t.delay_pr.to_string()));
        }
        d
    }

    pub fn from_kv(d: &KvDoc) -> Result<Self> {
        d.reject_unknown(SCENE_KEYS)?;
        let zero = C64::new(0.0, 0.0);
        let mut s = Scene::empty(d.usize_req("ris_elements")?, d.usize_req("pr_antennas")?);
        s.ris_spacing = d.f64_or("ris_spacing", HALF_WAVELENGTH)?;
        s.pr_spacing = d.f64_or("pr_spacing", HALF_WAVELENGTH)?;
        s.noise_power = d.f64_or("noise_power", 0.0)?;
        s.theta_ap_ris = d.f64_or("theta_ap_ris", 0.0)?;
        s.theta_ris_pr = d.f64_or("theta_ris_pr", 0.0)?;
        s.theta_ap_pr = d.f64_or("theta_ap_pr", 0.0)?;
        s.alpha0 = d.gain_or("alpha0", zero)?;
        s.rho_ap_pr = d.gain_or("rho_ap_pr", zero)?;
        s.rho_ris_pr = d.gain_or("rho_ris_pr", zero)?;
        s.delay_ap_ris = d.usize_or("delay_ap_ris", 0)?;
        s.delay_ris_pr = d.usize_or("delay_ris_pr", 0)?;
        s.delay_ap_pr = d.usize_or("delay_ap_pr", 0)?;

        if let Some(theta_ris) = d.f64_list("target_theta_ris")? {
            let k = theta_ris.len();
            let theta_pr = match d.f64_list("target_theta_pr")? {
                Some(v) => fit_len("target_theta_pr", k, Some(v))?,
                None => theta_ris.clone(),
            };
            let alpha = fit_len("target_alpha", k, d.gain_list("target_alpha")?)?;
            let rho = fit_len("target_rho", k, d.gain_list("target_rho")?)?;
            let delays = |key: &'static str| -> Result<Vec<usize>> {
                match d.usize_list(key)? {
                    Some(v) => fit_len(key, k, Some(v)),
                    None => Ok(vec![0; k]),
                }
            };
            let (dap, dris, dpr) = (
                delays("target_delay_ap")?,
                delays("target_delay_ris")?,
                delays("target_delay_pr")?,
            );
            for i in 0..k {
                s.targets.push(Target {
                    theta_ris: theta_ris[i],
                    theta_pr: theta_pr[i],
                    alpha: alpha[i],
                    rho: rho[i],
                    delay_ap: dap[i],
                    delay_ris: dris[i],
                    delay_pr: dpr[i],
                });
            }
        }
        s.validate()?;
        Ok(s)
    }
}
