//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL` line to
//! stderr (written past the test harness capture) and then asserts.
//!
//! The Monte-Carlo criteria share sweeps through `OnceLock`, and a global
//! lock keeps the heavy tests from competing for cores so their runtime
//! budgets are measured honestly.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_radar::array::{steering_vector, AngleGrid};
use ris_radar::beamformer::{beamform, compute_weights, BeamformedData};
use ris_radar::experiment::{
    run_spectrum, run_sweep, Algorithm, ExperimentConfig, SweepKind, SweepTable, TrialPoint,
};
use ris_radar::nlms::{batch_spectrum, detect_peaks, normalize_spectrum, sequential_spectrum, NlmsConfig};
use ris_radar::ris::{build_ris_matrix, orthogonal_projector};
use ris_radar::rng;
use ris_radar::scene::{
    generate_waveform, ris_incident_signal, simulate_campaign_with, Layout, PathProfile, Scene, WaveformKind,
};
use ris_radar::C64;

// Tolerances and budgets.
const PROJECTOR_REL_TOL: f64 = 1e-10;
const UNIT_MODULUS_TOL: f64 = 1e-12;
const DISTORTIONLESS_TOL: f64 = 1e-12;
const PASSTHROUGH_TOL: f64 = 1e-10;
const ORACLE_TOL: f64 = 1e-9;
const GRID_STEP: f64 = 0.5;
const NOISELESS_TARGET: f64 = 20.0;
const FOUR_TARGET_ANGLE_TOL: f64 = 1.0;
const PD_LEVEL: f64 = 0.9;
const MIN_RIS_GAIN_DB: f64 = 8.0;
const DOMINANCE_SLACK: f64 = 0.05;
const MSE_SLACK: f64 = 0.05;
const SEP_PD_LEVEL: f64 = 0.8;
const MIN_SEP_FACTOR: f64 = 1.5;
const TRIALS: usize = 200;
const BUDGET_1: Duration = Duration::from_secs(1);
const BUDGET_2: Duration = Duration::from_secs(1);
const BUDGET_4: Duration = Duration::from_secs(10);
const BUDGET_5: Duration = Duration::from_secs(30);
const BUDGET_6: Duration = Duration::from_secs(120);
const BUDGET_7: Duration = Duration::from_secs(30 * 60);
const BUDGET_10: Duration = Duration::from_secs(20 * 60);

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy() -> std::sync::MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(n: u32, pass: bool, detail: String) {
    let line = format!("criterion {n:>2}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn steer(theta: f64, n: usize) -> Array1<C64> {
    Array1::from_iter((0..n).map(|m| C64::from_polar(1.0, PI * m as f64 * theta.to_radians().sin())))
}

#[test]
fn c01_projector_null() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for &m in &[4usize, 16, 64] {
        for _ in 0..100 {
            let theta = rng.gen_range(-90.0..=90.0);
            let a = steering_vector(theta, m, 0.5).unwrap();
            let p = orthogonal_projector(&a).unwrap();
            let r = p.dot(&a.elements).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            worst = worst.max(r / a.norm_sqr().sqrt());
        }
    }
    let t = start.elapsed();
    report(
        1,
        worst <= PROJECTOR_REL_TOL && t < BUDGET_1,
        format!("max |P a|/|a| = {worst:.2e}, {t:.2?}"),
    );
}

#[test]
fn c02_unit_modulus() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for b in 0..100u64 {
        let m = [4usize, 16, 32, 64][b as usize % 4];
        let v = build_ris_matrix(rng.gen_range(-90.0..=90.0), m, 100, b).unwrap();
        worst = worst.max(v.matrix().iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max));
    }
    let t = start.elapsed();
    report(2, worst <= UNIT_MODULUS_TOL && t < BUDGET_2, format!("max ||v|-1| = {worst:.2e}, {t:.2?}"));
}

#[test]
fn c03_distortionless_beamformer() {
    let mut worst_gain = 0.0f64;
    for &n in &[1usize, 4, 8, 32] {
        for &theta in &[-40.0, 0.0, 17.3, 89.0] {
            let w = compute_weights(theta, n).unwrap();
            let a = steer(theta, n);
            let g: C64 = w.w.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
            worst_gain = worst_gain.max((g - C64::new(1.0, 0.0)).norm());
        }
    }
    // RIS-only data: Y_n = rho a(theta_RIS^PR) x_n must beamform to rho x_n
    let mut s = Scene::empty(16, 8);
    s.theta_ap_ris = -10.0;
    s.theta_ris_pr = -40.0;
    s.alpha0 = C64::new(0.9, 0.2);
    s.rho_ris_pr = C64::new(0.3, -0.6);
    s.delay_ris_pr = 2;
    s.targets.push(ris_radar::scene::Target {
        theta_ris: 25.0,
        theta_pr: 25.0,
        alpha: C64::new(-0.4, 0.8),
        rho: C64::new(0.0, 0.0),
        delay_ap: 3,
        delay_ris: 1,
        delay_pr: 0,
    });
    let l = 40;
    let v = build_ris_matrix(-10.0, 16, 12, 3).unwrap();
    let wf = generate_waveform(l + s.max_delay(), WaveformKind::Qpsk, 4).unwrap();
    let cube = simulate_campaign_with(&s, &v, &wf, l, 5).unwrap();
    let z = beamform(&cube, &compute_weights(-40.0, 8).unwrap()).unwrap();
    let mut worst_pass = 0.0f64;
    for n in 0..12 {
        for li in 0..l {
            let r = ris_incident_signal(&s, &wf, s.max_delay() + li - s.delay_ris_pr).unwrap();
            let x: C64 = v.row(n).iter().zip(r.iter()).map(|(a, b)| a * b).sum();
            worst_pass = worst_pass.max((z.z[[n, li]] - s.rho_ris_pr * x).norm());
        }
    }
    report(
        3,
        worst_gain <= DISTORTIONLESS_TOL && worst_pass <= PASSTHROUGH_TOL,
        format!("max |w^H a - 1| = {worst_gain:.2e}, RIS pass-through error {worst_pass:.2e}"),
    );
}

/// Literal batch filter: fresh estimate per angle, reference
/// `a^H V^H z_l`, step normalized by `||z_l||`.
fn batch_literal(z: &Array2<C64>, v: &Array2<C64>, grid: &[f64], mu: f64) -> Vec<f64> {
    let (n_ep, l) = z.dim();
    grid.iter()
        .map(|&theta| {
            let vh = v.t().mapv(|x| x.conj());
            let a = steer(theta, v.ncols());
            let mut est = Array1::<C64>::zeros(n_ep);
            for li in 0..l {
                let zl = z.column(li).to_owned();
                let p: C64 = a.iter().zip(vh.dot(&zl).iter()).map(|(x, y)| x.conj() * y).sum();
                let y: C64 = est.iter().zip(zl.iter()).map(|(x, y)| x.conj() * y).sum();
                let nz = zl.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                est = &est + &zl.mapv(|x| x * (p - y).conj() * (mu / nz));
            }
            est.iter().map(|x| x.norm_sqr()).sum()
        })
        .collect()
}

#[test]
fn c04_batch_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = AngleGrid::new(-75.0, 75.0, 10.0).unwrap();
    assert_eq!(grid.len(), 16);
    let cfg = NlmsConfig {
        mu_batch: 0.1,
        grid: grid.clone(),
        ..Default::default()
    };
    let mut worst = 0.0f64;
    for inst in 0..20u64 {
        let v = build_ris_matrix(rng.gen_range(-60.0..60.0), 4, 8, inst).unwrap();
        let z = Array2::from_shape_fn((8, 16), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let got = batch_spectrum(&BeamformedData { z: z.clone() }, &v, &cfg).unwrap();
        let want = batch_literal(&z, v.matrix(), grid.values(), cfg.mu_batch);
        for (g, w) in got.p.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    let t = start.elapsed();
    report(4, worst <= ORACLE_TOL && t < BUDGET_4, format!("max abs difference {worst:.2e}, {t:.2?}"));
}

#[test]
fn c05_noiseless_localization() {
    let _g = heavy();
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    let nlms = NlmsConfig::default();
    // only the target -> RIS -> PR echo survives
    let paths = PathProfile { target_pr_gain: 0.0, ap_ris_gain: 0.0, ap_pr_gain: 0.0, ..cfg.paths.clone() };
    let mut hits = [0usize; 2];
    let mut worst = [0.0f64; 2];
    let mut misses = Vec::new();
    for run in 0..20u64 {
        let theta = NOISELESS_TARGET;
        let layout = Layout {
            targets_ris: vec![theta],
            targets_pr: vec![theta],
            theta_ap_ris: cfg.theta_ap_ris,
            theta_ris_pr: cfg.theta_ris_pr,
            theta_ap_pr: cfg.theta_ap_pr,
            ris_elements: 64,
            pr_antennas: cfg.pr_antennas,
        };
        let s = Scene::draw(&layout, &paths, &mut rng::substream(run, &[0])).unwrap();
        assert_eq!(s.noise_power, 0.0);
        let v = build_ris_matrix(cfg.theta_ap_ris, 64, cfg.n_epoch, run).unwrap();
        let wf = generate_waveform(cfg.snapshots + s.max_delay(), WaveformKind::Qpsk, run).unwrap();
        let cube = simulate_campaign_with(&s, &v, &wf, cfg.snapshots, run).unwrap();
        let z = beamform(&cube, &compute_weights(cfg.theta_ris_pr, cfg.pr_antennas).unwrap()).unwrap();
        let b = batch_spectrum(&z, &v, &nlms).unwrap().argmax_angle().unwrap();
        let q = sequential_spectrum(&z, &v, &nlms).unwrap().pop().unwrap().argmax_angle().unwrap();
        for (i, est) in [b, q].into_iter().enumerate() {
            let e = (est - theta).abs();
            worst[i] = worst[i].max(e);
            if e <= GRID_STEP + 1e-9 {
                hits[i] += 1;
            } else {
                misses.push(format!("seed {run}: est {est}"));
            }
        }
    }
    let t = start.elapsed();
    report(
        5,
        hits == [20, 20] && t < BUDGET_5,
        format!(
            "batch {}/20 (max err {:.2} deg), sequential {}/20 (max err {:.2} deg), {t:.2?} [{}]",
            hits[0],
            worst[0],
            hits[1],
            worst[1],
            misses.join("; ")
        ),
    );
}

#[test]
fn c06_four_target_spectrum() {
    let _g = heavy();
    let start = Instant::now();
    let truth = [20.0, 30.0, 40.0, 50.0];
    let cfg = ExperimentConfig {
        targets: truth.to_vec(),
        ris_elements: vec![64],
        n_epoch: 100,
        snapshots: 100,
        algorithms: vec![Algorithm::Batch, Algorithm::Sequential],
        seed: 1,
        ..Default::default()
    };
    let out = run_spectrum(&cfg, &TrialPoint::from_config(&cfg, 10.0), 64, cfg.seed).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for o in &out {
        let s = normalize_spectrum(o.spectrum.as_ref().unwrap()).unwrap();
        let d = detect_peaks(&s, 0.5);
        let good = d.k_hat() == 4 && d.angles.iter().zip(&truth).all(|(a, t)| (a - t).abs() <= FOUR_TARGET_ANGLE_TOL);
        ok &= good;
        detail.push(format!("{}: {:?}", o.algorithm, d.angles));
    }
    let t = start.elapsed();
    report(6, ok && t < BUDGET_6, format!("{}, {t:.2?}", detail.join("; ")));
}

/// SNR sweep at K = 2 shared by criteria 7-9: baseline with batch NLMS,
/// RIS sizes 16 and 32 with both algorithms. Trial seeds depend only on the
/// sweep point and trial index, so all configurations see the same scenes.
struct SnrSweep {
    baseline: SweepTable,
    ris: SweepTable,
    elapsed: Duration,
}

fn snr_config() -> ExperimentConfig {
    ExperimentConfig {
        targets: vec![20.0, 30.0],
        pr_antennas: 8,
        snapshots: 100,
        n_epoch: 100,
        trials: TRIALS,
        snr_db: (0..21).map(|i| -26.0 + 2.0 * i as f64).collect(),
        seed: 2024,
        ..Default::default()
    }
}

fn snr_sweep() -> &'static SnrSweep {
    static CELL: OnceLock<SnrSweep> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let base = ExperimentConfig {
            ris_elements: vec![0],
            algorithms: vec![Algorithm::Batch],
            ..snr_config()
        };
        let ris = ExperimentConfig {
            ris_elements: vec![16, 32],
            include_baseline: false,
            algorithms: vec![Algorithm::Batch, Algorithm::Sequential],
            ..snr_config()
        };
        let baseline = run_sweep(&base, SweepKind::Snr).unwrap();
        let ris = run_sweep(&ris, SweepKind::Snr).unwrap();
        SnrSweep {
            baseline,
            ris,
            elapsed: start.elapsed(),
        }
    })
}

/// First sweep point at which `metric >= level`; `+inf` when never reached.
fn first_reaching(series: &[(f64, f64)], level: f64) -> f64 {
    series
        .iter()
        .find(|(_, v)| *v >= level)
        .map_or(f64::INFINITY, |(x, _)| *x)
}

fn fmt_series(s: &[(f64, f64)]) -> String {
    s.iter().map(|(x, v)| format!("{x}:{v:.3}")).collect::<Vec<_>>().join(" ")
}

#[test]
fn c07_ris_gain() {
    let _g = heavy();
    let sw = snr_sweep();
    let base = sw.baseline.series(0, Algorithm::Batch, "pd");
    let m16 = sw.ris.series(16, Algorithm::Batch, "pd");
    let t_base = first_reaching(&base, PD_LEVEL);
    let t16 = first_reaching(&m16, PD_LEVEL);
    let top = base.last().unwrap().0;
    // a baseline that never reaches the level is only credited with the
    // top of the sweep, so the gain is a lower bound
    let gain = t_base.min(top + 2.0) - t16;
    let pass = t16.is_finite() && gain >= MIN_RIS_GAIN_DB && sw.elapsed < BUDGET_7;
    let _ = std::io::stderr().write_all(
        format!("    baseline P_D {}\n    M=16 P_D {}\n", fmt_series(&base), fmt_series(&m16)).as_bytes(),
    );
    report(
        7,
        pass,
        format!(
            "P_D>=0.9 at {t16} dB (M=16) vs {t_base} dB (no RIS): gain >= {gain} dB, sweep {:.1?}",
            sw.elapsed
        ),
    );
}

#[test]
fn c08_element_count_monotone() {
    let _g = heavy();
    let sw = snr_sweep();
    let m16 = sw.ris.series(16, Algorithm::Batch, "pd");
    let m32 = sw.ris.series(32, Algorithm::Batch, "pd");
    let (worst_at, worst) = m16
        .iter()
        .zip(&m32)
        .map(|((x, a), (_, b))| (*x, a - b))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    report(
        8,
        worst <= DOMINANCE_SLACK,
        format!("largest P_D(M=16) - P_D(M=32) = {worst:.3} at {worst_at} dB"),
    );
    let _ = std::io::stderr().write_all(format!("    M=32 P_D {}\n", fmt_series(&m32)).as_bytes());
}

#[test]
fn c09_batch_beats_sequential() {
    let _g = heavy();
    let sw = snr_sweep();
    let mut violations = Vec::new();
    let mut compared = 0;
    for m in [16, 32] {
        let b = sw.ris.series(m, Algorithm::Batch, "mse");
        let s = sw.ris.series(m, Algorithm::Sequential, "mse");
        for ((x, mb), (_, ms)) in b.iter().zip(&s) {
            match (mb.is_nan(), ms.is_nan()) {
                // neither produced a correct count: nothing to compare
                (true, true) => {}
                // sequential never counted correctly while batch did
                (false, true) => compared += 1,
                (true, false) => violations.push(format!("M={m} {x} dB: batch undefined, sequential {ms:.3}")),
                (false, false) => {
                    compared += 1;
                    if *mb > ms + MSE_SLACK {
                        violations.push(format!("M={m} {x} dB: {mb:.3} > {ms:.3}"));
                    }
                }
            }
        }
    }
    report(
        9,
        violations.is_empty() && compared > 0,
        format!("{compared} points compared; violations: [{}]", violations.join("; ")),
    );
}

#[test]
fn c10_separation_resolution() {
    let _g = heavy();
    let start = Instant::now();
    let mut seps: Vec<f64> = (1..=12).map(|i| i as f64 * 0.5).collect();
    seps.extend((7..=24).map(|d| d as f64));
    let cfg = ExperimentConfig {
        targets: vec![20.0],
        ris_elements: vec![32],
        include_baseline: true,
        separations: seps,
        separation_sweep_snr_db: 20.0,
        trials: TRIALS,
        algorithms: vec![Algorithm::Batch],
        seed: 2025,
        ..Default::default()
    };
    let table = run_sweep(&cfg, SweepKind::Separation).unwrap();
    let t = start.elapsed();
    let base = table.series(0, Algorithm::Batch, "pd");
    let m32 = table.series(32, Algorithm::Batch, "pd");
    let d_base = first_reaching(&base, SEP_PD_LEVEL);
    let d32 = first_reaching(&m32, SEP_PD_LEVEL);
    let top = base.last().unwrap().0;
    let factor = d_base.min(top + 1.0) / d32;
    let _ = std::io::stderr().write_all(
        format!("    baseline P_D {}\n    M=32 P_D {}\n", fmt_series(&base), fmt_series(&m32)).as_bytes(),
    );
    report(
        10,
        d32.is_finite() && factor >= MIN_SEP_FACTOR && t < BUDGET_10,
        format!("P_D>=0.8 from {d32} deg (M=32) vs {d_base} deg (no RIS): factor >= {factor:.2}, {t:.1?}"),
    );
}

#[test]
fn c11_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "targets = 20, 30\nris_elements = 16\nsnr_db = -10, 0\ntrials = 2\nalgorithm = batch, sequential\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let run = |args: &[&str], out: &str| -> Vec<u8> {
        let path = dir.path().join(out);
        let o = Command::new(env!("CARGO_BIN_EXE_rispr"))
            .args(args)
            .args(["--config", cfg, "--seed", "77", "--out", path.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(path).unwrap()
    };
    let mut same = true;
    let mut checked = Vec::new();
    for (args, name) in [
        (&["spectrum"][..], "spectrum"),
        (&["sweep-snr", "--m", "0,16"][..], "sweep-snr"),
        (&["sweep-separation", "--trials", "1"][..], "sweep-separation"),
    ] {
        let a = run(args, &format!("{name}-a.csv"));
        let b = run(args, &format!("{name}-b.csv"));
        let ok = a == b && !a.is_empty();
        same &= ok;
        checked.push(format!("{name} {}", if ok { "identical" } else { "DIFFERS" }));
    }
    // the library result must not depend on the worker count either
    let lib_cfg = ExperimentConfig {
        targets: vec![20.0, 30.0],
        ris_elements: vec![8],
        n_epoch: 20,
        snapshots: 20,
        snr_db: vec![0.0],
        trials: 4,
        ..Default::default()
    };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| run_sweep(&lib_cfg, SweepKind::Snr).unwrap());
    let b = three.install(|| run_sweep(&lib_cfg, SweepKind::Snr).unwrap());
    let csv = |t: &SweepTable| {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        buf
    };
    let threads_ok = csv(&a) == csv(&b);
    same &= threads_ok;
    report(
        11,
        same,
        format!(
            "repeated CLI runs: {}; 1 vs 3 worker threads: {}",
            checked.join(", "),
            if threads_ok { "identical" } else { "DIFFERS" }
        ),
    );
}
