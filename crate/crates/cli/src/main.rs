//! `sfwm`: batch simulation, sweeps, histogram analysis and fits.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::failure::{Failure, Outcome};

/// Thread count for parallel sweeps and fits; unset uses every core.
const THREADS_ENV: &str = "SFWM_THREADS";

#[derive(Parser)]
#[command(
    name = "sfwm",
    version,
    about = "Biphoton wave packets from double-Lambda SFWM in warm vapour"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Doppler integration: faddeeva_analytic, adaptive_panels or dense_trapezoid.
    #[arg(long)]
    quadrature: Option<String>,
    /// Reject unknown configuration keys instead of warning.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Wave packet, spectrum and observables at one parameter point.
    Simulate(Common),
    /// Rate and widths over a list of coupling detunings.
    Sweep(Common),
    /// Normalised biphoton spectrum at one parameter point.
    Spectrum(Common),
    /// Cross-correlation, SBR, rates and heralding from a coincidence histogram.
    Analyze {
        /// Histogram CSV; the `.meta` sidecar is read alongside it.
        histogram: PathBuf,
        /// Report relative rates only (allows uncorrected data).
        #[arg(long)]
        relative: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Fit one or more detuning series.
    Fit(Common),
}

fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n = raw.trim().parse::<usize>().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::config(
            "CONFIG_INVALID_VALUE",
            format!("{THREADS_ENV}=`{raw}` is not a positive integer"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config("CONFIG_INVALID_VALUE", format!("{THREADS_ENV}: {e}")))
}

fn load(common: &Common) -> Outcome<RunConfig> {
    let cfg = RunConfig::load(common.config.as_deref(), common.quadrature.as_deref())?;
    if let Some(first) = cfg.unknown.first() {
        if common.strict {
            return Err(Failure::config("CONFIG_UNKNOWN_KEY", first.clone()));
        }
        for u in &cfg.unknown {
            eprintln!("warning: CONFIG_UNKNOWN_KEY: {u}");
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Outcome<Vec<commands::Warning>> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(c) => commands::simulate(&load(&c)?, &c.out),
        Command::Sweep(c) => commands::sweep(&load(&c)?, &c.out),
        Command::Spectrum(c) => commands::spectrum(&load(&c)?, &c.out),
        Command::Analyze {
            histogram,
            relative,
            common,
        } => commands::analyze_histogram(&load(&common)?, &histogram, relative, &common.out),
        Command::Fit(c) => commands::fit(&load(&c)?, &c.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: USAGE: {first}");
            return ExitCode::from(failure::EXIT_CONFIG as u8);
        }
    };
    match run(cli) {
        Ok(warnings) => {
            for w in warnings {
                eprintln!("warning: {}: {}", w.code, w.message);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit as u8)
        }
    }
}
