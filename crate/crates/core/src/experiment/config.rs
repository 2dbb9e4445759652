use std::path::{Path, PathBuf};

use crate::array::AngleGrid;
use crate::error::{Error, Result};
use crate::kv::{format_list, KvDoc};
use crate::nlms::{NlmsConfig, DEFAULT_EPSILON, DEFAULT_MU_BATCH, DEFAULT_MU_SEQUENTIAL, DEFAULT_THRESHOLD};
use crate::scene::{PathProfile, WaveformKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Batch,
    Sequential,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "batch" => Ok(Self::Batch),
            "sequential" | "seq" => Ok(Self::Sequential),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Batch => "batch",
            Self::Sequential => "sequential",
        })
    }
}

/// Everything needed to reproduce a trial or a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Target angles seen from the RIS, degrees.
    pub targets: Vec<f64>,
    /// Target angles seen from the PR; `None` reuses `targets`.
    pub targets_pr: Option<Vec<f64>>,
    pub theta_ap_ris: f64,
    pub theta_ris_pr: f64,
    pub theta_ap_pr: f64,
    pub paths: PathProfile,
    /// RIS sizes to evaluate; 0 is the no-RIS baseline.
    pub ris_elements: Vec<usize>,
    /// Adds the M = 0 baseline to every sweep.
    pub include_baseline: bool,
    pub n_epoch: usize,
    pub snapshots: usize,
    pub pr_antennas: usize,
    pub snr_db: Vec<f64>,
    pub target_counts: Vec<usize>,
    pub separations: Vec<f64>,
    /// Spacing between consecutive targets in the target-count sweep.
    pub target_spacing: f64,
    pub targets_sweep_snr_db: f64,
    pub separation_sweep_snr_db: f64,
    /// Error levels (degrees) at which the error CDF is tabulated.
    pub cdf_errors: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub waveform: WaveformKind,
    pub nlms: NlmsConfig,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            targets: vec![20.0, 30.0],
            targets_pr: None,
            theta_ap_ris: -10.0,
            theta_ris_pr: -40.0,
            theta_ap_pr: 60.0,
            paths: PathProfile::default(),
            ris_elements: vec![16, 32],
            include_baseline: true,
            n_epoch: 100,
            snapshots: 100,
            pr_antennas: 8,
            snr_db: (0..=25).map(|i| -30.0 + 2.0 * i as f64).collect(),
            target_counts: (1..=8).collect(),
            separations: (1..=30).map(|i| i as f64 * 0.5).collect(),
            target_spacing: 5.0,
            targets_sweep_snr_db: 0.0,
            separation_sweep_snr_db: 20.0,
            cdf_errors: vec![0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0],
            trials: 200,
            seed: 1,
            algorithms: vec![Algorithm::Batch],
            waveform: WaveformKind::Qpsk,
            nlms: NlmsConfig::default(),
            output: None,
        }
    }
}

const KEYS: &[&str] = &[
    "targets",
    "targets_pr",
    "theta_ap_ris",
    "theta_ris_pr",
    "theta_ap_pr",
    "target_ris_gain",
    "target_pr_gain",
    "ap_ris_gain",
    "ris_pr_gain",
    "ap_pr_gain",
    "max_delay",
    "ris_elements",
    "include_baseline",
    "n_epoch",
    "snapshots",
    "pr_antennas",
    "snr_db",
    "target_counts",
    "separations",
    "target_spacing",
    "targets_sweep_snr_db",
    "separation_sweep_snr_db",
    "cdf_errors",
    "trials",
    "seed",
    "algorithm",
    "waveform",
    "mu",
    "mu_batch",
    "mu_sequential",
    "grid",
    "peak_threshold",
    "epsilon",
    "output",
];

fn grid_text(g: &AngleGrid) -> String {
    format!("{}:{}:{}", g.start(), g.step(), g.stop())
}

/// `start:step:stop` or an explicit comma list of angles.
fn parse_grid(text: &str) -> Result<AngleGrid> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    if let [a, s, b] = parts.as_slice() {
        let p = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::Config(format!("grid: bad number `{x}`")))
        };
        return AngleGrid::new(p(a)?, p(b)?, p(s)?);
    }
    let mut d = KvDoc::new();
    d.set("grid", text);
    AngleGrid::from_values(d.f64_list("grid")?.unwrap_or_default())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.ris_elements.is_empty() || self.snr_db.is_empty() || self.algorithms.is_empty() {
            return bad("ris_elements, snr_db and algorithm must be nonempty");
        }
        if self.target_counts.is_empty() || self.separations.is_empty() {
            return bad("target_counts and separations must be nonempty");
        }
        if self.ris_elements.contains(&1) {
            return bad("a RIS needs at least 2 elements (use 0 for the baseline)");
        }
        if self.n_epoch == 0 || self.snapshots == 0 || self.pr_antennas == 0 {
            return bad("n_epoch, snapshots and pr_antennas must be positive");
        }
        if let Some(pr) = &self.targets_pr {
            if pr.len() != self.targets.len() {
                return bad("targets_pr must match targets in length");
            }
        }
        for a in self.targets.iter().chain(self.targets_pr.iter().flatten()) {
            crate::array::check_angle(*a)?;
        }
        self.nlms.validate()
    }

    /// RIS sizes evaluated by sweeps, baseline first when enabled.
    pub fn sweep_ris_sizes(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if self.include_baseline && !self.ris_elements.contains(&0) {
            out.push(0);
        }
        for &m in &self.ris_elements {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }

    pub fn from_kv(d: &KvDoc) -> Result<Self> {
        d.reject_unknown(KEYS)?;
        let def = Self::default();
        let paths = PathProfile {
            target_ris_gain: d.f64_or("target_ris_gain", def.paths.target_ris_gain)?,
            target_pr_gain: d.f64_or("target_pr_gain", def.paths.target_pr_gain)?,
            ap_ris_gain: d.f64_or("ap_ris_gain", def.paths.ap_ris_gain)?,
            ris_pr_gain: d.f64_or("ris_pr_gain", def.paths.ris_pr_gain)?,
            ap_pr_gain: d.f64_or("ap_pr_gain", def.paths.ap_pr_gain)?,
            max_delay: d.usize_or("max_delay", def.paths.max_delay)?,
        };
        let grid = match d.get("grid") {
            None => def.nlms.grid.clone(),
            Some(text) => parse_grid(text)?,
        };
        let algorithms = match d.str_list("algorithm") {
            Some(v) => v.iter().map(|s| s.parse()).collect::<Result<Vec<Algorithm>>>()?,
            None => def.algorithms.clone(),
        };
        let cfg = Self {
            targets: d.f64_list("targets")?.unwrap_or(def.targets),
            targets_pr: d.f64_list("targets_pr")?,
            theta_ap_ris: d.f64_or("theta_ap_ris", def.theta_ap_ris)?,
            theta_ris_pr: d.f64_or("theta_ris_pr", def.theta_ris_pr)?,
            theta_ap_pr: d.f64_or("theta_ap_pr", def.theta_ap_pr)?,
            paths,
            ris_elements: d.usize_list("ris_elements")?.unwrap_or(def.ris_elements),
            include_baseline: d.bool_or("include_baseline", def.include_baseline)?,
            n_epoch: d.usize_or("n_epoch", def.n_epoch)?,
            snapshots: d.usize_or("snapshots", def.snapshots)?,
            pr_antennas: d.usize_or("pr_antennas", def.pr_antennas)?,
            snr_db: d.f64_list("snr_db")?.unwrap_or(def.snr_db),
            target_counts: d.usize_list("target_counts")?.unwrap_or(def.target_counts),
            separations: d.f64_list("separations")?.unwrap_or(def.separations),
            target_spacing: d.f64_or("target_spacing", def.target_spacing)?,
            targets_sweep_snr_db: d.f64_or("targets_sweep_snr_db", def.targets_sweep_snr_db)?,
            separation_sweep_snr_db: d.f64_or("separation_sweep_snr_db", def.separation_sweep_snr_db)?,
            cdf_errors: d.f64_list("cdf_errors")?.unwrap_or(def.cdf_errors),
            trials: d.usize_or("trials", def.trials)?,
            seed: d.u64_or("seed", def.seed)?,
            algorithms,
            waveform: match d.get("waveform") {
                Some(w) => w.parse()?,
                None => def.waveform,
            },
            nlms: NlmsConfig {
                mu_batch: d.f64_or("mu_batch", d.f64_or("mu", DEFAULT_MU_BATCH)?)?,
                mu_sequential: d.f64_or("mu_sequential", d.f64_or("mu", DEFAULT_MU_SEQUENTIAL)?)?,
                grid,
                peak_threshold: d.f64_or("peak_threshold", DEFAULT_THRESHOLD)?,
                epsilon_norm: d.f64_or("epsilon", DEFAULT_EPSILON)?,
            },
            output: d.get("output").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_kv(&KvDoc::parse(&text)?)
    }

    /// Canonical key-value form. The output path is left out so that it does
    /// not change the config hash.
    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        d.set("targets", format_list(&self.targets));
        if let Some(pr) = &self.targets_pr {
            d.set("targets_pr", format_list(pr));
        }
        d.set("theta_ap_ris", self.theta_ap_ris.to_string());
        d.set("theta_ris_pr", self.theta_ris_pr.to_string());
        d.set("theta_ap_pr", self.theta_ap_pr.to_string());
        d.set("target_ris_gain", self.paths.target_ris_gain.to_string());
        d.set("target_pr_gain", self.paths.target_pr_gain.to_string());
        d.set("ap_ris_gain", self.paths.ap_ris_gain.to_string());
        d.set("ris_pr_gain", self.paths.ris_pr_gain.to_string());
        d.set("ap_pr_gain", self.paths.ap_pr_gain.to_string());
        d.set("max_delay", self.paths.max_delay.to_string());
        d.set("ris_elements", format_list(&self.ris_elements));
        d.set("include_baseline", self.include_baseline.to_string());
        d.set("n_epoch", self.n_epoch.to_string());
        d.set("snapshots", self.snapshots.to_string());
        d.set("pr_antennas", self.pr_antennas.to_string());
        d.set("snr_db", format_list(&self.snr_db));
        d.set("target_counts", format_list(&self.target_counts));
        d.set("separations", format_list(&self.separations));
        d.set("target_spacing", self.target_spacing.to_string());
        d.set("targets_sweep_snr_db", self.targets_sweep_snr_db.to_string());
        d.set("separation_sweep_snr_db", self.separation_sweep_snr_db.to_string());
        d.set("cdf_errors", format_list(&self.cdf_errors));
        d.set("trials", self.trials.to_string());
        d.set("seed", self.seed.to_string());
        d.set("algorithm", format_list(&self.algorithms));
        d.set("waveform", self.waveform.to_string());
        d.set("mu_batch", self.nlms.mu_batch.to_string());
        d.set("mu_sequential", self.nlms.mu_sequential.to_string());
        d.set("grid", grid_text(&self.nlms.grid));
        d.set("peak_threshold", self.nlms.peak_threshold.to_string());
        d.set("epsilon", self.nlms.epsilon_norm.to_string());
        d
    }

    /// FNV-1a digest of the canonical form, as 16 hex digits.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.to_kv().to_text().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    /// Angles scored as ground truth: RIS-side angles with a RIS, PR-side
    /// angles for the baseline.
    pub fn truth_for(&self, m: usize, targets: &[f64], targets_pr: &[f64]) -> Vec<f64> {
        let mut t = if m == 0 { targets_pr.to_vec() } else { targets.to_vec() };
        t.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
        t
    }
}
