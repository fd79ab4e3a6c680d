use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geo_langevin_cli::config::{self, ConfigError};
use geo_langevin_cli::{run, CliError, Command};

/// Langevin paths in a punctured plane with a geometric gauge force:
/// trajectories, level-shift ensembles, spectra, closed forms and checks.
#[derive(Parser)]
#[command(name = "geo-langevin", version)]
struct Cli {
    /// Config file of `key = value` lines; the built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `ensemble.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// One trajectory to `trajectory.csv`.
    Simulate,
    /// A level-shift ensemble to `samples.csv` and `manifest.json`.
    Ensemble,
    /// Ensemble-averaged periodogram to `spectrum.csv`.
    Spectrum,
    /// Closed-form predictions as JSON on stdout.
    Predict,
    /// The full check battery; exits 1 if any check fails.
    Validate,
}

/// Thread cap from `GEO_LANGEVIN_THREADS`.
fn threads() -> Result<Option<usize>, ConfigError> {
    match std::env::var("GEO_LANGEVIN_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(ConfigError::Invalid {
                key: "GEO_LANGEVIN_THREADS".into(),
                reason: format!("expected a positive integer, got `{v}`"),
            }),
        },
    }
}

fn load(cli: &Cli) -> Result<config::RunConfig, CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| ConfigError::Invalid {
            key: "--config".into(),
            reason: format!("{}: {e}", path.display()),
        })?,
        None => config::DEFAULT_CONFIG.to_string(),
    };
    let mut entries = config::parse_entries(&text)?;
    if let Some(seed) = cli.seed {
        entries.insert("ensemble.seed".into(), seed.to_string());
    }
    if let Some(out) = &cli.out {
        entries.insert("output.directory".into(), out.display().to_string());
    }
    Ok(config::RunConfig::from_entries(&entries)?)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let pool = geo_langevin::parallel::pool(threads()?)?;
    let cmd = match cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Ensemble => Command::Ensemble,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Predict => Command::Predict,
        Cmd::Validate => Command::Validate,
    };
    let outcome = pool.install(|| run(cmd, &cfg))?;
    if let Some(s) = &outcome.stdout {
        print!("{s}");
    }
    for f in &outcome.files {
        eprintln!("wrote {f}");
    }
    Ok(outcome.manifest.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("geo-langevin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
