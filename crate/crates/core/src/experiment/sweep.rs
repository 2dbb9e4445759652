use std::io::Write;

use rayon::prelude::*;

use super::metrics::{detection_probability, error_cdf, mse, success_resolve_percentage};
use super::{run_trial_point, Algorithm, ExperimentConfig, TrialPoint, TrialResult};
use crate::csv::{sig6, write_table};
use crate::error::Result;
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Over `snr_db` with the configured targets.
    Snr,
    /// Over `target_counts`: targets at `targets[0] + k * target_spacing`.
    Targets,
    /// Over `separations`: two targets `targets[0]` and `targets[0] + sep`.
    Separation,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Snr => "snr",
            Self::Targets => "targets",
            Self::Separation => "separation",
        }
    }

    fn points(self, cfg: &ExperimentConfig) -> Vec<(f64, TrialPoint)> {
        let first = cfg.targets.first().copied().unwrap_or(0.0);
        match self {
            Self::Snr => cfg
                .snr_db
                .iter()
                .map(|&s| (s, TrialPoint::from_config(cfg, s)))
                .collect(),
            Self::Targets => cfg
                .target_counts
                .iter()
                .map(|&k| {
                    let t = (0..k).map(|i| first + i as f64 * cfg.target_spacing).collect();
                    (k as f64, TrialPoint::with_targets(cfg, t, cfg.targets_sweep_snr_db))
                })
                .collect(),
            Self::Separation => cfg
                .separations
                .iter()
                .map(|&d| {
                    let t = vec![first, first + d];
                    (d, TrialPoint::with_targets(cfg, t, cfg.separation_sweep_snr_db))
                })
                .collect(),
        }
    }
}

/// One tabulated metric value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: f64,
    pub ris_elements: usize,
    pub algorithm: Algorithm,
    pub metric: String,
    pub value: f64,
    /// Number of trials the value was computed from. For `mse` these are
    /// the correctly enumerated trials only.
    pub scored: usize,
}

/// Long-format sweep results.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub kind: SweepKind,
    pub trials: usize,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn value(&self, point: f64, m: usize, algorithm: Algorithm, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.point == point && r.ris_elements == m && r.algorithm == algorithm && r.metric == metric)
            .map(|r| r.value)
    }

    /// `(point, value)` pairs in sweep order.
    pub fn series(&self, m: usize, algorithm: Algorithm, metric: &str) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.ris_elements == m && r.algorithm == algorithm && r.metric == metric)
            .map(|r| (r.point, r.value))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    self.kind.name().to_string(),
                    sig6(r.point),
                    r.ris_elements.to_string(),
                    r.algorithm.to_string(),
                    r.metric.clone(),
                    sig6(r.value),
                    r.scored.to_string(),
                    self.trials.to_string(),
                    self.config_hash.clone(),
                ]
            })
            .collect();
        write_table(
            w,
            &[
                "sweep",
                "point",
                "ris_elements",
                "algorithm",
                "metric",
                "value",
                "scored_trials",
                "trials",
                "config_hash",
            ],
            &rows,
        )
    }
}

fn tabulate(point: f64, m: usize, algorithm: Algorithm, results: &[TrialResult], cdf_levels: &[f64]) -> Vec<SweepRow> {
    let n = results.len();
    let row = |metric: String, value: f64, scored: usize| SweepRow {
        point,
        ris_elements: m,
        algorithm,
        metric,
        value,
        scored,
    };
    let (mse_value, mse_n) = mse(results);
    let mut out = vec![
        row("mse".into(), mse_value, mse_n),
        row("pd".into(), detection_probability(results), n),
        row("srp".into(), success_resolve_percentage(results), n),
    ];
    for (e, c) in cdf_levels.iter().zip(error_cdf(results, cdf_levels)) {
        out.push(row(format!("cdf_lt_{}", sig6(*e)), c, n));
    }
    out
}

/// Monte-Carlo sweep. For every point and every RIS size (plus the baseline
/// when enabled) it runs `cfg.trials` trials and tabulates MSE, P_D, SRP and
/// the error CDF for each algorithm. Trial `t` at point `i` uses the seed
/// path `(seed, TRIAL, i, t)` for every RIS size, so configurations are
/// compared on common random numbers. Results are independent of the number
/// of worker threads.
pub fn run_sweep(cfg: &ExperimentConfig, kind: SweepKind) -> Result<SweepTable> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (i, (x, point)) in kind.points(cfg).into_iter().enumerate() {
        for m in cfg.sweep_ris_sizes() {
            let per_trial: Vec<Vec<TrialResult>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let seed = rng::derive(cfg.seed, &[stream::TRIAL, i as u64, t as u64]);
                    run_trial_point(cfg, &point, m, seed)
                })
                .collect::<Result<_>>()?;
            for (a, &alg) in cfg.algorithms.iter().enumerate() {
                let results: Vec<TrialResult> = per_trial.iter().map(|r| r[a].clone()).collect();
                rows.extend(tabulate(x, m, alg, &results, &cfg.cdf_errors));
            }
        }
    }
    Ok(SweepTable {
        kind,
        trials: cfg.trials,
        config_hash: cfg.hash(),
        rows,
    })
}
