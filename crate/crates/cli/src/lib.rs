//! Configuration, manifests and the subcommands behind the `geo-langevin`
//! binary.

// Guards written `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod manifest;

pub use commands::{run, CliError, Command, Outcome};
pub use config::{parse_config, ConfigError, RunConfig, DEFAULT_CONFIG};
pub use manifest::Manifest;
