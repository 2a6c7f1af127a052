//! Flat `key=value` configuration.
//!
//! Lines are `key=value`; `#` starts a comment. Later sources override
//! earlier ones: defaults, then the file, then the output-directory
//! environment variable, then `--key=value` flags.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use numeraire_core::{validate_params, DriftMode, ModelParams, ParamError, SimulationSchedule, ValidationReport};
use thiserror::Error;

/// Environment variable that overrides `out_dir`.
pub const OUT_DIR_ENV: &str = "NUMERAIRE_OUT_DIR";

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "N",
    "n",
    "s2",
    "s2_last",
    "S2",
    "G",
    "eps",
    "dt",
    "burn_steps",
    "record_steps",
    "seed",
    "snapshot_stride",
    "mode",
    "replicas",
    "closed_market",
    "allow_invalid",
    "charts",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{}: {message}", origin(*.line))]
    Parse { line: usize, message: String },
    #[error("{}: unknown key '{key}'", origin(*.line))]
    UnknownKey { line: usize, key: String },
    #[error("{key}: {message}")]
    Range { key: &'static str, message: String },
    #[error("drift bound violated at ranks {ranks}: sup g_k = {worst:+.6} exceeds -eps; every partial drift sum must stay below -eps")]
    Validation {
        ranks: String,
        worst: f64,
        report: ValidationReport,
    },
}

/// Line 0 marks a command-line override.
fn origin(line: usize) -> String {
    if line == 0 {
        "command line".to_string()
    } else {
        format!("line {line}")
    }
}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey { key, .. } => Some(key),
            ConfigError::Range { key, .. } => Some(key),
            _ => None,
        }
    }
}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub stocks: usize,
    pub open_size: usize,
    pub s2: f64,
    pub s2_last: f64,
    pub common_var: f64,
    pub growth: f64,
    pub eps: f64,
    pub dt: f64,
    pub burn_steps: u64,
    pub record_steps: u64,
    pub seed: u64,
    pub snapshot_stride: u64,
    pub mode: DriftMode,
    pub replicas: usize,
    pub closed_market: bool,
    pub allow_invalid: bool,
    pub charts: bool,
    pub out_dir: PathBuf,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            stocks: 550,
            open_size: 500,
            s2: 0.06,
            s2_last: 0.06,
            common_var: 0.04,
            growth: 0.051,
            eps: 0.001,
            dt: 1e-4,
            burn_steps: 1_000_000,
            record_steps: 1_000_000,
            seed: 42,
            snapshot_stride: 1000,
            mode: DriftMode::B,
            replicas: 1,
            closed_market: false,
            allow_invalid: false,
            charts: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl SimConfig {
    pub fn params(&self) -> ModelParams {
        let mut p = ModelParams::uniform(
            self.stocks,
            self.open_size,
            self.s2,
            self.common_var,
            self.growth,
            self.dt,
        );
        p.eps = self.eps;
        if self.s2_last != self.s2 {
            p = p.with_variance_ramp(self.s2, self.s2_last);
        }
        p
    }

    pub fn schedule(&self) -> SimulationSchedule {
        SimulationSchedule::new(self.burn_steps, self.record_steps, self.seed)
            .with_stride(self.snapshot_stride)
    }

    /// Applies one `key=value` assignment. `line` is 0 for command-line flags.
    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e: T::Err| ConfigError::Parse {
                line,
                message: format!("{key}: cannot parse '{value}': {e}"),
            })
        }
        match key {
            "N" => self.stocks = num(line, key, value)?,
            "n" => self.open_size = num(line, key, value)?,
            "s2" => {
                let v = num(line, key, value)?;
                // a constant s2 resets the ramp unless s2_last is given afterwards
                self.s2 = v;
                self.s2_last = v;
            }
            "s2_last" => self.s2_last = num(line, key, value)?,
            "S2" => self.common_var = num(line, key, value)?,
            "G" => self.growth = num(line, key, value)?,
            "eps" => self.eps = num(line, key, value)?,
            "dt" => self.dt = num(line, key, value)?,
            "burn_steps" => self.burn_steps = num(line, key, value)?,
            "record_steps" => self.record_steps = num(line, key, value)?,
            "seed" => self.seed = num(line, key, value)?,
            "snapshot_stride" => self.snapshot_stride = num(line, key, value)?,
            "mode" => {
                self.mode = value.parse().map_err(|message| ConfigError::Parse { line, message })?
            }
            "replicas" => self.replicas = num(line, key, value)?,
            "closed_market" => self.closed_market = num(line, key, value)?,
            "allow_invalid" => self.allow_invalid = num(line, key, value)?,
            "charts" => self.charts = num(line, key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            other => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "N" => self.stocks.to_string(),
            "n" => self.open_size.to_string(),
            "s2" => format_number(self.s2),
            "s2_last" => format_number(self.s2_last),
            "S2" => format_number(self.common_var),
            "G" => format_number(self.growth),
            "eps" => format_number(self.eps),
            "dt" => format_number(self.dt),
            "burn_steps" => self.burn_steps.to_string(),
            "record_steps" => self.record_steps.to_string(),
            "seed" => self.seed.to_string(),
            "snapshot_stride" => self.snapshot_stride.to_string(),
            "mode" => self.mode.as_str().to_string(),
            "replicas" => self.replicas.to_string(),
            "closed_market" => self.closed_market.to_string(),
            "allow_invalid" => self.allow_invalid.to_string(),
            "charts" => self.charts.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Config as parseable `key=value` text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key));
        }
        out
    }

    /// Range checks, then the drift-bound check (skipped with `allow_invalid`).
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.open_size > self.stocks {
            return Err(ConfigError::Range {
                key: "n",
                message: format!("n = {} exceeds N = {}", self.open_size, self.stocks),
            });
        }
        if self.open_size == self.stocks && !self.closed_market {
            return Err(ConfigError::Range {
                key: "n",
                message: "n must be below N for an open market; set closed_market=true for n = N"
                    .into(),
            });
        }
        if self.replicas == 0 {
            return Err(ConfigError::Range {
                key: "replicas",
                message: "at least one replica is required".into(),
            });
        }
        if self.record_steps == 0 {
            return Err(ConfigError::Range {
                key: "record_steps",
                message: "at least one recorded step is required".into(),
            });
        }
        if self.snapshot_stride == 0 {
            return Err(ConfigError::Range {
                key: "snapshot_stride",
                message: "must be at least 1".into(),
            });
        }
        let report = validate_params(&self.params()).map_err(range_error)?;
        if !report.valid && !self.allow_invalid {
            let worst = report
                .violating_ranks
                .iter()
                .map(|&k| report.bounds[k])
                .fold(f64::NEG_INFINITY, f64::max);
            return Err(ConfigError::Validation {
                ranks: rank_list(&report.violating_ranks),
                worst,
                report,
            });
        }
        Ok(())
    }
}

fn range_error(e: ParamError) -> ConfigError {
    let key = match &e {
        ParamError::StockCount(_) => "N",
        ParamError::OpenSize { .. } => "n",
        ParamError::VarianceLength { .. } | ParamError::NonPositiveVariance { .. } => "s2",
        ParamError::NegativeCommonVariance(_) => "S2",
        ParamError::NonPositiveEps(_) => "eps",
        ParamError::NonPositiveStep(_) => "dt",
        ParamError::NonFinite(name) => match *name {
            "S2" => "S2",
            "G" => "G",
            "eps" => "eps",
            "dt" => "dt",
            _ => "s2",
        },
    };
    ConfigError::Range {
        key,
        message: e.to_string(),
    }
}

/// 1-based rank list, compressed into ranges.
fn rank_list(ranks: &[usize]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < ranks.len() {
        let start = ranks[i];
        let mut end = start;
        while i + 1 < ranks.len() && ranks[i + 1] == end + 1 {
            i += 1;
            end = ranks[i];
        }
        parts.push(if start == end {
            format!("{}", start + 1)
        } else {
            format!("{}..{}", start + 1, end + 1)
        });
        i += 1;
    }
    parts.join(",")
}

/// 17 significant digits, lossless for `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn split_assignment(line: usize, text: &str) -> Result<(&str, &str), ConfigError> {
    let (k, v) = text.split_once('=').ok_or_else(|| ConfigError::Parse {
        line,
        message: format!("expected key=value, found '{text}'"),
    })?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        return Err(ConfigError::Parse {
            line,
            message: "empty key".into(),
        });
    }
    Ok((k, v))
}

/// Parses config text and then applies `overrides` (each `key=value`, with or
/// without a leading `--`). Does not run [`SimConfig::validate`].
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SimConfig, ConfigError> {
    let mut cfg = SimConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_assignment(idx + 1, line)?;
        cfg.set(idx + 1, k, v)?;
    }
    for o in overrides {
        let (k, v) = split_assignment(0, o.trim_start_matches("--"))?;
        cfg.set(0, k, v)?;
    }
    Ok(cfg)
}
