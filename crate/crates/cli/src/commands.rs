//! The five subcommands. Each writes its files under the output directory
//! and returns the run manifest.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use geo_langevin::spectral::{force_density, transfer_jr, velocity_density};
use geo_langevin::{
    accumulate_phase, adiabaticity_check, periodogram, run_ensemble, simulate, validate, Conditioning, Predictions,
    ShiftEnsemble, Signal, Spectrum, StreamFactory,
};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{ConfigError, Format, RunConfig};
use crate::manifest::Manifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] geo_langevin::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    /// 2 for anything the user can fix in the config, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Core(geo_langevin::Error::InvalidParam { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Ensemble,
    Spectrum,
    Predict,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Ensemble => "ensemble",
            Command::Spectrum => "spectrum",
            Command::Predict => "predict",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub manifest: Manifest,
    /// Written files, in the order written.
    pub files: Vec<String>,
    /// What goes to stdout, if anything.
    pub stdout: Option<String>,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut out = Outcome {
        manifest: Manifest::new(cmd.name(), cfg, Value::Null),
        files: Vec::new(),
        stdout: None,
    };
    if cmd != Command::Predict {
        prepare_dir(&cfg.output.directory)?;
    }
    match cmd {
        Command::Simulate => run_simulate(cfg, &mut out)?,
        Command::Ensemble => run_ensemble_cmd(cfg, &mut out)?,
        Command::Spectrum => run_spectrum(cfg, &mut out)?,
        Command::Predict => {
            let p = Predictions::compute(&cfg.model, cfg.thresholds.low_noise)?;
            let mut s = serde_json::to_string_pretty(&p).expect("predictions serialize");
            s.push('\n');
            out.manifest.stats = serde_json::to_value(p).expect("predictions serialize");
            out.stdout = Some(s);
            return Ok(out);
        }
        Command::Validate => run_validate(cfg, &mut out),
    }
    if cfg.output.wants(Format::Json) {
        let json = out.manifest.to_json();
        write_file(cfg, "manifest.json", &mut out.files, |w| w.write_all(json.as_bytes()))?;
    }
    Ok(out)
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| ConfigError::Invalid {
        key: "output.directory".into(),
        reason: format!("cannot create {}: {e}", dir.display()),
    })?;
    let md = fs::metadata(dir).map_err(|e| ConfigError::Invalid {
        key: "output.directory".into(),
        reason: e.to_string(),
    })?;
    if md.permissions().readonly() {
        return Err(ConfigError::Invalid {
            key: "output.directory".into(),
            reason: format!("{} is not writable", dir.display()),
        }
        .into());
    }
    Ok(())
}

fn write_file<F>(cfg: &RunConfig, name: &str, files: &mut Vec<String>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
{
    let path = cfg.output.directory.join(name);
    let wrap = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(wrap)?);
    body(&mut w).and_then(|_| w.flush()).map_err(wrap)?;
    files.push(path.display().to_string());
    Ok(())
}

fn run_simulate(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let opts = geo_langevin::SimOptions {
        record_noise: true,
        ..cfg.sim_options()
    };
    let traj = simulate(
        &cfg.model,
        &opts,
        &mut StreamFactory::new(cfg.ensemble.seed).substream(0),
    )?;
    let phase = accumulate_phase(&traj)?;
    let adiabatic = adiabaticity_check(&cfg.model, cfg.thresholds.adiabatic, Some(&traj));
    let end = traj.last().r;
    out.manifest.stats = json!({
        "n_steps": traj.len() - 1,
        "endpoint": [end.x, end.y],
        "min_radius": traj.min_radius(),
        "phase": phase,
        "adiabaticity": adiabatic,
    });
    if cfg.output.wants(Format::Csv) {
        write_file(cfg, "trajectory.csv", &mut out.files, |w| traj.write_csv(w))?;
    }
    Ok(())
}

fn ensemble_stats(e: &ShiftEnsemble) -> Value {
    json!({
        "conditioning": e.conditioning,
        "n_paths": e.n_paths,
        "n_accepted": e.n_accepted,
        "n_aborted": e.n_aborted,
        "accepted_fraction": e.accepted_fraction,
        "mean": e.mean,
        "variance": e.variance,
        "std_dev": e.std_dev(),
        "std_err_mean": e.std_err_mean,
        "histogram": e.histogram,
    })
}

fn run_ensemble_cmd(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let p = &cfg.model;
    let free = run_ensemble(
        p,
        cfg.ensemble.n_paths,
        &cfg.sim_options(),
        Conditioning::Free,
        cfg.ensemble.seed,
    )?;
    let radius = match cfg.conditioning() {
        Conditioning::Endpoint { radius } => radius,
        Conditioning::Free => Conditioning::default_radius(p),
    };
    // Both variants are reported; which one the closed forms describe is
    // not settled.
    let binned = if radius > 0.0 {
        match free.recondition(Conditioning::Endpoint { radius }, p) {
            Ok(e) => ensemble_stats(&e),
            Err(e) => json!({ "error": e.to_string() }),
        }
    } else {
        Value::Null
    };
    let primary = match cfg.conditioning() {
        Conditioning::Free => free.clone(),
        c => free.recondition(c, p)?,
    };
    let predictions = match Predictions::compute(p, cfg.thresholds.low_noise) {
        Ok(pr) => serde_json::to_value(pr).expect("predictions serialize"),
        Err(e) => json!({ "error": e.to_string() }),
    };
    out.manifest.stats = json!({
        "free": ensemble_stats(&free),
        "endpoint_binned": binned,
        "predictions": predictions,
    });
    if cfg.output.wants(Format::Csv) {
        write_file(cfg, "samples.csv", &mut out.files, |w| primary.write_samples_csv(w))?;
    }
    Ok(())
}

fn run_spectrum(cfg: &RunConfig, out: &mut Outcome) -> Result<(), CliError> {
    let p = &cfg.model;
    let signal = cfg.spectrum.signal;
    let opts = geo_langevin::SimOptions {
        record_noise: signal == Signal::Force,
        ..cfg.sim_options()
    };
    let seeds = StreamFactory::new(cfg.ensemble.seed);
    let spectra = geo_langevin::parallel::map_indexed(cfg.spectrum.n_paths as u64, |i| {
        let traj = simulate(p, &opts, &mut seeds.substream(i))?;
        periodogram(&traj, signal, cfg.spectrum.segments)
    });
    let spectra = spectra.into_iter().collect::<Result<Vec<_>, _>>()?;
    let avg = Spectrum::average(&spectra)?;
    let reference = |w: f64| match signal {
        Signal::Position => transfer_jr(w, p).unwrap_or(f64::NAN),
        Signal::Velocity => velocity_density(w, p),
        Signal::Force => force_density(p),
    };
    let (lo, hi) = (3.0 * p.omega_c(), 0.1 / p.dt);
    let ratio = if p.kt > 0.0 {
        avg.band_ratio(lo, hi, reference).ok()
    } else {
        None
    };
    out.manifest.stats = json!({
        "signal": signal,
        "n_paths": cfg.spectrum.n_paths,
        "segments": cfg.spectrum.segments,
        "bins": avg.omega.len(),
        "d_omega": avg.d_omega(),
        "mean_square": avg.mean_square(),
        "band": [lo, hi],
        "band_ratio_to_analytic": ratio,
    });
    if cfg.output.wants(Format::Csv) {
        write_file(cfg, "spectrum.csv", &mut out.files, |w| avg.write_csv(w))?;
    }
    Ok(())
}

fn run_validate(cfg: &RunConfig, out: &mut Outcome) {
    let report = validate(&cfg.model, &cfg.settings());
    out.manifest.checks = report
        .checks
        .iter()
        .map(|c| serde_json::to_value(c).expect("check serializes"))
        .collect();
    out.manifest.passed = report.passed;
    let (pass, fail, skip) = report.checks.iter().fold((0, 0, 0), |(p, f, s), c| match c.status {
        geo_langevin::Status::Pass => (p + 1, f, s),
        geo_langevin::Status::Fail => (p, f + 1, s),
        geo_langevin::Status::Skipped => (p, f, s + 1),
    });
    out.manifest.stats = json!({ "passed": pass, "failed": fail, "skipped": skip });
    let mut summary = String::new();
    for c in &report.checks {
        let status = match c.status {
            geo_langevin::Status::Pass => "PASS",
            geo_langevin::Status::Fail => "FAIL",
            geo_langevin::Status::Skipped => "SKIP",
        };
        summary.push_str(&format!("{status} {}", c.name));
        if !c.note.is_empty() {
            summary.push_str(&format!(" ({})", c.note));
        }
        summary.push('\n');
    }
    out.stdout = Some(summary);
}
