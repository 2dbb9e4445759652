//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiment::{run_spectrum, run_sweep, selftest, Algorithm, ExperimentConfig, SweepKind, TrialPoint};

#[derive(Parser, Debug)]
#[command(name = "rispr", version, about = "RIS-aided passive radar localization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single trial: writes the normalized spectrum and reports detections.
    Spectrum(Common),
    /// Monte-Carlo sweep over SNR.
    SweepSnr(Common),
    /// Monte-Carlo sweep over the number of targets.
    SweepTargets(Common),
    /// Monte-Carlo sweep over the separation of two targets.
    SweepSeparation(Common),
    /// Internal consistency checks.
    Selftest,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment configuration (key = value lines).
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `batch`, `sequential`, or a comma list of both.
    #[arg(long)]
    algorithm: Option<String>,
    /// RIS sizes, comma separated; 0 selects the no-RIS baseline.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV; stdout when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(a) = &self.algorithm {
            cfg.algorithms = a
                .split(',')
                .map(|s| s.parse())
                .collect::<Result<Vec<Algorithm>>>()?;
        }
        if let Some(m) = &self.m {
            cfg.ris_elements = m.clone();
            // an explicit size list is taken literally
            cfg.include_baseline = false;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn with_output(cfg: &ExperimentConfig, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    match &cfg.output {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::Config(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn spectrum(c: &Common) -> Result<()> {
    let cfg = c.load()?;
    let m = cfg.ris_elements[0];
    let point = TrialPoint::from_config(&cfg, cfg.snr_db[0]);
    let out = run_spectrum(&cfg, &point, m, cfg.seed)?;
    let first = &out[0];
    let s = first.spectrum.as_ref().ok_or(Error::NoEnergy)?;
    with_output(&cfg, |w| s.write_csv(w))?;
    for o in &out {
        let angles: Vec<String> = o.detection.angles.iter().map(|a| a.to_string()).collect();
        eprintln!("{}: {} target(s) at [{}]", o.algorithm, o.detection.k_hat(), angles.join(", "));
    }
    Ok(())
}

fn sweep(c: &Common, kind: SweepKind) -> Result<()> {
    let cfg = c.load()?;
    let table = run_sweep(&cfg, kind)?;
    with_output(&cfg, |w| table.write_csv(w))
}

fn selftest() -> bool {
    let checks = selftest::run_all();
    for c in &checks {
        println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.passed)
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Spectrum(c) => spectrum(c),
        Command::SweepSnr(c) => sweep(c, SweepKind::Snr),
        Command::SweepTargets(c) => sweep(c, SweepKind::Targets),
        Command::SweepSeparation(c) => sweep(c, SweepKind::Separation),
        Command::Selftest => {
            return if selftest() { 0 } else { 1 };
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("rispr: {e}");
            1
        }
    }
}
