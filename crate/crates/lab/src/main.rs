use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zeno_lab::config::{Calibration, ExperimentConfig, NS};
use zeno_lab::experiments::{crb_csv, ld_csv, run_crb, run_ld, run_scaling, run_surface, scaling_csv, surface_csv};
use zeno_lab::output::CsvTable;
use zeno_lab::validate::{heavy_checks, quick_checks};
use zeno_lab::{LabError, Result};

/// Zeno-dynamics experiments under randomly timed projective measurements.
#[derive(Debug, Parser)]
#[command(name = "zeno-lab", version)]
struct Cli {
    /// JSON experiment configuration; the built-in kHz reference point when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces the coupling frequency with a named calibration.
    #[arg(long, global = true, value_enum)]
    calibration: Option<Calibration>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// P* and the normalised FIM eigenvalue over a (mu1, mu2) grid.
    Surface,
    /// Fisher information for mu2 over an (N, m) sweep.
    Scaling,
    /// Batch maximum-likelihood estimation of mu2 against the Cramér-Rao bound.
    Crb,
    /// Concentration of (1/m) sum ln q with growing m.
    Ld,
    /// Runs the acceptance checks and prints one line per check.
    Validate {
        /// Also run the full-size Monte Carlo checks (minutes).
        #[arg(long)]
        full: bool,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::reference(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(c) = cli.calibration {
        cfg = cfg.with_calibration(c);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cli: &Cli, table: &CsvTable) -> Result<()> {
    match &cli.out {
        Some(path) => table.write_to(BufWriter::new(File::create(path)?)),
        None => table.write_to(io::stdout().lock()),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Resource(e.to_string()))?;
    }
    match &cli.command {
        Command::Surface => {
            let cfg = load_config(cli)?;
            emit(cli, &surface_csv(&cfg, &run_surface(&cfg)?))?;
        }
        Command::Scaling => {
            let cfg = load_config(cli)?;
            emit(cli, &scaling_csv(&cfg, &run_scaling(&cfg)?))?;
        }
        Command::Crb => {
            let cfg = load_config(cli)?;
            let r = run_crb(&cfg)?;
            eprintln!(
                "variance / CRB = {:.4} +/- {:.4}, mean mu2_hat = {:.4} ns",
                r.saturation_ratio,
                r.ratio_std_error(),
                r.mean / NS
            );
            emit(cli, &crb_csv(&cfg, &r))?;
        }
        Command::Ld => {
            let cfg = load_config(cli)?;
            let t = run_ld(&cfg)?;
            if let Some(s) = t.slope {
                eprintln!("std-dev slope vs m: {s:.4}");
            }
            emit(cli, &ld_csv(&cfg, &t))?;
        }
        Command::Validate { full } => {
            let mut checks = quick_checks();
            if *full {
                checks.extend(heavy_checks());
            }
            let mut all = true;
            let mut out = io::stdout().lock();
            for check in checks {
                let c = check()?;
                all &= c.passed;
                writeln!(out, "{c}")?;
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
