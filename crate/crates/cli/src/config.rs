//! Flat `section.key = value` run configuration.
//!
//! One key per line, `#` starts a comment. Every key has a documented
//! default except `ensemble.seed`; unknown keys are rejected so that typos
//! never fall back silently to a default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use geo_langevin::validate::{Budget, Thresholds};
use geo_langevin::{default_puncture_radius, ForceMode, InitialVelocity, ModelParams, Signal, Vec2};
use thiserror::Error;

/// The shipped default document; every recognised key appears in it.
pub const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.conf");

/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV: f64 = 8.617_333_262e-5;
/// Reduced Planck constant in eV·s.
pub const HBAR_EV: f64 = 6.582_119_569e-16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given twice")]
    Duplicate(String),
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

impl ConfigError {
    fn invalid(key: &str, reason: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitSystem {
    /// Whatever the numbers mean; `kT` is an energy.
    Natural,
    /// Energies in eV, times in s, temperatures in K.
    ElectronVolt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditioningKind {
    Free,
    Endpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n_paths: usize,
    pub conditioning: ConditioningKind,
    /// `None` means the default `0.5 sqrt(4kT T / eta)`.
    pub bin_radius: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeConfig {
    pub force: ForceMode,
    pub units: UnitSystem,
    pub initial_velocity: InitialVelocity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub signal: Signal,
    pub segments: usize,
    pub n_paths: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub ensemble: EnsembleConfig,
    pub output: OutputConfig,
    pub mode: ModeConfig,
    pub spectrum: SpectrumConfig,
    pub budget: Budget,
    pub thresholds: Thresholds,
}

/// Every key the parser accepts, in document order.
pub const KEYS: &[&str] = &[
    "model.mass",
    "model.eta",
    "model.g",
    "model.kT",
    "model.temperature",
    "model.hbar",
    "model.duration",
    "model.dt",
    "model.start",
    "model.end",
    "model.puncture_radius",
    "model.omega_b_cap",
    "model.tau_c",
    "mode.force",
    "mode.units",
    "mode.initial_velocity",
    "ensemble.n_paths",
    "ensemble.conditioning",
    "ensemble.bin_radius",
    "ensemble.seed",
    "output.directory",
    "output.formats",
    "spectrum.signal",
    "spectrum.segments",
    "spectrum.n_paths",
    "validate.noise_steps",
    "validate.ou_paths",
    "validate.msd_paths",
    "validate.spectrum_paths",
    "validate.lattice_samples",
    "validate.ensemble_paths",
    "thresholds.low_noise",
    "thresholds.adiabatic",
    "thresholds.low_noise_mc",
    "thresholds.sigma_factor",
];

/// Splits a document into `key -> value`, rejecting unknown and repeated keys.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(ConfigError::Duplicate(key.to_string()));
        }
    }
    Ok(out)
}

/// Parses and validates a document; absent keys take their defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RunConfig::from_entries(&parse_entries(text)?)
}

struct Reader<'a>(&'a BTreeMap<String, String>);

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ConfigError::invalid(key, format!("`{v}`: {e}")))
            })
            .transpose()
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn point(&self, key: &str, default: Vec2) -> Result<Vec2, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(default);
        };
        let parts: Vec<&str> = v.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [x, y] => {
                let parse = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| ConfigError::invalid(key, format!("`{v}`: {e}")))
                };
                Ok(Vec2::new(parse(x)?, parse(y)?))
            }
            _ => Err(ConfigError::invalid(key, format!("expected `x, y`, got `{v}`"))),
        }
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)], default: T) -> Result<T, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(default);
        };
        options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                ConfigError::invalid(key, format!("`{v}` is not one of {}", names.join(", ")))
            })
    }
}

const FORCE: &[(&str, ForceMode)] = &[("simplified", ForceMode::Simplified), ("full", ForceMode::Full)];
const UNITS: &[(&str, UnitSystem)] = &[("natural", UnitSystem::Natural), ("ev", UnitSystem::ElectronVolt)];
const VELOCITY: &[(&str, InitialVelocity)] = &[
    ("maxwell", InitialVelocity::Maxwell),
    ("homogeneous", InitialVelocity::Homogeneous),
];
const CONDITIONING: &[(&str, ConditioningKind)] = &[
    ("free", ConditioningKind::Free),
    ("endpoint", ConditioningKind::Endpoint),
];
const SIGNAL: &[(&str, Signal)] = &[
    ("position", Signal::Position),
    ("velocity", Signal::Velocity),
    ("force", Signal::Force),
];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], value: &T) -> &'static str {
    options.iter().find(|(_, t)| t == value).map(|(n, _)| *n).unwrap_or("?")
}

/// Maps a core parameter name back to the config key that sets it.
fn config_key(field: &str) -> &'static str {
    match field {
        "mass" => "model.mass",
        "friction" => "model.eta",
        "coupling" => "model.g",
        "kT" => "model.kT",
        "hbar" => "model.hbar",
        "duration" => "model.duration",
        "dt" => "model.dt",
        "start" => "model.start",
        "end" => "model.end",
        "puncture_radius" => "model.puncture_radius",
        "omega_b_cap" => "model.omega_b_cap",
        "tau_c" => "model.tau_c",
        _ => "model",
    }
}

impl RunConfig {
    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        for key in entries.keys() {
            if !KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey(key.clone()));
            }
        }
        let r = Reader(entries);
        let d = ModelParams::desk_scale();
        let units = r.choice("mode.units", UNITS, UnitSystem::Natural)?;

        let kt = match (r.get::<f64>("model.kT")?, r.get::<f64>("model.temperature")?) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::invalid(
                    "model.temperature",
                    "give either model.kT or model.temperature",
                ))
            }
            (_, Some(_)) if units != UnitSystem::ElectronVolt => {
                return Err(ConfigError::invalid("model.temperature", "needs mode.units = ev"))
            }
            (_, Some(t)) => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(ConfigError::invalid(
                        "model.temperature",
                        format!("must be >= 0, got {t}"),
                    ));
                }
                BOLTZMANN_EV * t
            }
            (Some(kt), None) => kt,
            (None, None) => d.kt,
        };
        let hbar_default = match units {
            UnitSystem::Natural => d.hbar,
            UnitSystem::ElectronVolt => HBAR_EV,
        };
        let start = r.point("model.start", d.start)?;
        let end = r.point("model.end", d.end)?;
        let model = ModelParams {
            mass: r.or("model.mass", d.mass)?,
            friction: r.or("model.eta", d.friction)?,
            coupling: r.or("model.g", d.coupling)?,
            kt,
            hbar: r.or("model.hbar", hbar_default)?,
            duration: r.or("model.duration", d.duration)?,
            dt: r.or("model.dt", d.dt)?,
            start,
            end,
            puncture_radius: r.or("model.puncture_radius", default_puncture_radius(&start, &end))?,
            omega_b_cap: r.get("model.omega_b_cap")?,
            tau_c: r.get("model.tau_c")?,
        };
        model.validate().map_err(|e| match e {
            geo_langevin::Error::InvalidParam { key, reason } => ConfigError::invalid(config_key(key), reason),
            other => ConfigError::invalid("model", other),
        })?;

        let seed = r
            .get::<u64>("ensemble.seed")?
            .ok_or_else(|| ConfigError::Missing("ensemble.seed".into()))?;
        let ensemble = EnsembleConfig {
            n_paths: r.or("ensemble.n_paths", 1000)?,
            conditioning: r.choice("ensemble.conditioning", CONDITIONING, ConditioningKind::Free)?,
            bin_radius: r.get("ensemble.bin_radius")?,
            seed,
        };
        if ensemble.n_paths < 2 {
            return Err(ConfigError::invalid(
                "ensemble.n_paths",
                format!("must be >= 2, got {}", ensemble.n_paths),
            ));
        }
        if let Some(b) = ensemble.bin_radius {
            if !(b > 0.0 && b.is_finite()) {
                return Err(ConfigError::invalid(
                    "ensemble.bin_radius",
                    format!("must be > 0, got {b}"),
                ));
            }
        }

        let formats = match r.raw("output.formats") {
            None => vec![Format::Csv, Format::Json],
            Some(v) => v
                .split(',')
                .map(|s| match s.trim() {
                    "csv" => Ok(Format::Csv),
                    "json" => Ok(Format::Json),
                    other => Err(ConfigError::invalid(
                        "output.formats",
                        format!("unknown format `{other}`"),
                    )),
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let output = OutputConfig {
            directory: PathBuf::from(r.raw("output.directory").unwrap_or("out")),
            formats,
        };

        let mode = ModeConfig {
            force: r.choice("mode.force", FORCE, ForceMode::Simplified)?,
            units,
            initial_velocity: r.choice("mode.initial_velocity", VELOCITY, InitialVelocity::Maxwell)?,
        };

        let spectrum = SpectrumConfig {
            signal: r.choice("spectrum.signal", SIGNAL, Signal::Position)?,
            segments: r.or("spectrum.segments", geo_langevin::spectral::DEFAULT_SEGMENTS)?,
            n_paths: r.or("spectrum.n_paths", 100)?,
        };
        for (key, v) in [
            ("spectrum.segments", spectrum.segments),
            ("spectrum.n_paths", spectrum.n_paths),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(key, "must be >= 1"));
            }
        }

        let b = Budget::default();
        let budget = Budget {
            noise_steps: r.or("validate.noise_steps", b.noise_steps)?,
            ou_paths: r.or("validate.ou_paths", b.ou_paths)?,
            msd_paths: r.or("validate.msd_paths", b.msd_paths)?,
            spectrum_paths: r.or("validate.spectrum_paths", b.spectrum_paths)?,
            lattice_samples: r.or("validate.lattice_samples", b.lattice_samples)?,
            ensemble_paths: r.or("validate.ensemble_paths", b.ensemble_paths)?,
        };
        for (key, v) in [
            ("validate.ou_paths", budget.ou_paths),
            ("validate.msd_paths", budget.msd_paths),
            ("validate.spectrum_paths", budget.spectrum_paths),
            ("validate.ensemble_paths", budget.ensemble_paths),
        ] {
            if v < 2 {
                return Err(ConfigError::invalid(key, "must be >= 2"));
            }
        }
        for (key, v) in [
            ("validate.noise_steps", budget.noise_steps),
            ("validate.lattice_samples", budget.lattice_samples),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(key, "must be >= 1"));
            }
        }
        let t = Thresholds::default();
        let thresholds = Thresholds {
            low_noise: r.or("thresholds.low_noise", t.low_noise)?,
            adiabatic: r.or("thresholds.adiabatic", t.adiabatic)?,
            low_noise_mc: r.or("thresholds.low_noise_mc", t.low_noise_mc)?,
            sigma_factor: r.or("thresholds.sigma_factor", t.sigma_factor)?,
        };
        for (key, v) in [
            ("thresholds.low_noise", thresholds.low_noise),
            ("thresholds.adiabatic", thresholds.adiabatic),
            ("thresholds.low_noise_mc", thresholds.low_noise_mc),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::invalid(key, format!("must be > 0, got {v}")));
            }
        }
        if !(thresholds.sigma_factor > 1.0) {
            return Err(ConfigError::invalid(
                "thresholds.sigma_factor",
                format!("must be > 1, got {}", thresholds.sigma_factor),
            ));
        }

        Ok(RunConfig {
            model,
            ensemble,
            output,
            mode,
            spectrum,
            budget,
            thresholds,
        })
    }

    /// Every setting as `key -> value`; parsing this back gives an equal
    /// config. Temperatures are written as `model.kT`, floats in shortest
    /// round-trip form.
    pub fn to_entries(&self) -> BTreeMap<String, String> {
        let m = &self.model;
        let f = |x: f64| format!("{x:?}");
        let pt = |p: &Vec2| format!("{:?}, {:?}", p.x, p.y);
        let mut e = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            e.insert(k.to_string(), v);
        };
        put("model.mass", f(m.mass));
        put("model.eta", f(m.friction));
        put("model.g", f(m.coupling));
        put("model.kT", f(m.kt));
        put("model.hbar", f(m.hbar));
        put("model.duration", f(m.duration));
        put("model.dt", f(m.dt));
        put("model.start", pt(&m.start));
        put("model.end", pt(&m.end));
        put("model.puncture_radius", f(m.puncture_radius));
        put("model.omega_b_cap", m.omega_b_cap.map(f).unwrap_or_default());
        put("model.tau_c", m.tau_c.map(f).unwrap_or_default());
        put("mode.force", name_of(FORCE, &self.mode.force).into());
        put("mode.units", name_of(UNITS, &self.mode.units).into());
        put(
            "mode.initial_velocity",
            name_of(VELOCITY, &self.mode.initial_velocity).into(),
        );
        put("ensemble.n_paths", self.ensemble.n_paths.to_string());
        put(
            "ensemble.conditioning",
            name_of(CONDITIONING, &self.ensemble.conditioning).into(),
        );
        put(
            "ensemble.bin_radius",
            self.ensemble.bin_radius.map(f).unwrap_or_default(),
        );
        put("ensemble.seed", self.ensemble.seed.to_string());
        put("output.directory", self.output.directory.display().to_string());
        let formats: Vec<&str> = self
            .output
            .formats
            .iter()
            .map(|x| match x {
                Format::Csv => "csv",
                Format::Json => "json",
            })
            .collect();
        put("output.formats", formats.join(", "));
        put("spectrum.signal", name_of(SIGNAL, &self.spectrum.signal).into());
        put("spectrum.segments", self.spectrum.segments.to_string());
        put("spectrum.n_paths", self.spectrum.n_paths.to_string());
        let b = &self.budget;
        put("validate.noise_steps", b.noise_steps.to_string());
        put("validate.ou_paths", b.ou_paths.to_string());
        put("validate.msd_paths", b.msd_paths.to_string());
        put("validate.spectrum_paths", b.spectrum_paths.to_string());
        put("validate.lattice_samples", b.lattice_samples.to_string());
        put("validate.ensemble_paths", b.ensemble_paths.to_string());
        let t = &self.thresholds;
        put("thresholds.low_noise", f(t.low_noise));
        put("thresholds.adiabatic", f(t.adiabatic));
        put("thresholds.low_noise_mc", f(t.low_noise_mc));
        put("thresholds.sigma_factor", f(t.sigma_factor));
        e
    }

    /// The config as a parseable document.
    pub fn to_document(&self) -> String {
        let e = self.to_entries();
        KEYS.iter()
            .filter_map(|k| e.get(*k).map(|v| format!("{k} = {v}\n")))
            .collect()
    }

    /// Bin radius actually used under endpoint conditioning.
    pub fn conditioning(&self) -> geo_langevin::Conditioning {
        match self.ensemble.conditioning {
            ConditioningKind::Free => geo_langevin::Conditioning::Free,
            ConditioningKind::Endpoint => geo_langevin::Conditioning::Endpoint {
                radius: self
                    .ensemble
                    .bin_radius
                    .unwrap_or_else(|| geo_langevin::Conditioning::default_radius(&self.model)),
            },
        }
    }

    pub fn sim_options(&self) -> geo_langevin::SimOptions {
        geo_langevin::SimOptions {
            mode: self.mode.force,
            initial_velocity: self.mode.initial_velocity,
            ..Default::default()
        }
    }

    pub fn settings(&self) -> geo_langevin::Settings {
        geo_langevin::Settings {
            budget: self.budget,
            thresholds: self.thresholds,
            ..geo_langevin::Settings::new(self.ensemble.seed)
        }
    }
}
