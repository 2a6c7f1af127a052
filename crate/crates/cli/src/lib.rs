//! Configuration, subcommands and file output for the `numeraire` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

pub use commands::{run, simulate_config, CliError, Command, Outcome};
pub use config::{parse_config, ConfigError, SimConfig, OUT_DIR_ENV};

use std::path::Path;

/// Builds the effective config: defaults, then `file`, then the
/// [`OUT_DIR_ENV`] override (if set), then `overrides`.
pub fn load_config(
    file: Option<&Path>,
    env_out_dir: Option<String>,
    overrides: &[String],
) -> Result<SimConfig, CliError> {
    let text = match file {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    let mut all = Vec::with_capacity(overrides.len() + 1);
    if let Some(dir) = env_out_dir {
        all.push(format!("out_dir={dir}"));
    }
    all.extend(overrides.iter().cloned());
    Ok(parse_config(&text, &all)?)
}
