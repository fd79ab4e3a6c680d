//! Run manifests: everything needed to reproduce a run, and its results.
//!
//! Nothing time- or machine-dependent goes in, so a manifest is a pure
//! function of the config and seed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ConfigError, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub fn version_string() -> String {
    format!("geo-langevin {}", env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub master_seed: u64,
    /// How per-path streams are derived from the master seed.
    pub scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seeds: Seeds,
    pub stats: Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Value>,
    pub passed: bool,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, stats: Value) -> Self {
        Manifest {
            schema_version: SCHEMA_VERSION,
            version: version_string(),
            command: command.to_string(),
            config: config.to_entries(),
            seeds: Seeds {
                master_seed: config.ensemble.seed,
                scheme: "ChaCha8 seeded by the master seed, one stream per path index; each battery check derives its own master seed"
                    .to_string(),
            },
            stats,
            checks: Vec::new(),
            passed: true,
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Recovers the run config from a manifest document.
    pub fn config_from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| ConfigError::Invalid {
            key: "manifest".into(),
            reason: e.to_string(),
        })?;
        RunConfig::from_entries(&m.config)
    }
}
