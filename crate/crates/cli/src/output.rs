//! CSV, metadata and figure files.
//!
//! Column layouts (header row first, ranks 1-based, reals with 17
//! significant digits):
//!
//! * `weights.csv`: `rank,avg_simulated_weight,first_order_weight`, ranks `1..=n`
//! * `growth.csv`: `time,log_topn,log_zmu,log_universe`, one row per snapshot
//! * `stability.csv`:
//!   `rank,lambda_crossover,lambda_stationary,lambda_final,sigma2_gap,avg_gap`,
//!   row `k` describes the boundary between ranks `k` and `k+1`, `k = 1..N-1`

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use numeraire_core::{SimulationResult, StabilityReport, GENERATOR_NAME};

use crate::config::{format_number, SimConfig};
use crate::svg::{Chart, Series};

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Everything derived from one (possibly merged) simulation.
pub struct RunArtifacts {
    pub result: SimulationResult,
    pub report: StabilityReport,
    pub first_order: Vec<f64>,
}

pub fn weights_csv(run: &RunArtifacts) -> String {
    let mut s = String::from("rank,avg_simulated_weight,first_order_weight\n");
    for (k, (a, b)) in run
        .result
        .avg_ranked_weights
        .iter()
        .zip(&run.first_order)
        .enumerate()
    {
        let _ = writeln!(s, "{},{},{}", k + 1, format_number(*a), format_number(*b));
    }
    s
}

pub fn growth_csv(run: &RunArtifacts) -> String {
    let mut s = String::from("time,log_topn,log_zmu,log_universe\n");
    for snap in &run.result.growth.snapshots {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            format_number(snap.time),
            format_number(snap.log_topn),
            format_number(snap.log_zmu),
            format_number(snap.log_universe)
        );
    }
    s
}

pub fn stability_csv(run: &RunArtifacts) -> String {
    let r = &run.report;
    let mut s =
        String::from("rank,lambda_crossover,lambda_stationary,lambda_final,sigma2_gap,avg_gap\n");
    for k in 0..r.lambda.len() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            k + 1,
            format_number(r.lambda_crossover[k]),
            format_number(r.lambda_stationary[k]),
            format_number(r.lambda[k]),
            format_number(r.sigma2_gap[k]),
            format_number(r.avg_gap[k])
        );
    }
    s
}

/// Run metadata: `#` lines for provenance and diagnostics, then the full
/// config echo, so the file itself is a valid config.
pub fn meta_txt(cfg: &SimConfig, run: &RunArtifacts) -> String {
    let r = &run.result;
    let ranks: Vec<String> = run
        .report
        .fallback_ranks
        .iter()
        .map(|k| (k + 1).to_string())
        .collect();
    let mut s = String::new();
    let _ = writeln!(s, "# version={VERSION}");
    let _ = writeln!(s, "# generator={GENERATOR_NAME}");
    let _ = writeln!(s, "# seed={}", cfg.seed);
    let _ = writeln!(s, "# streams=0..{}", cfg.replicas);
    let _ = writeln!(s, "# residual_max={}", format_number(r.max_numeraire_residual));
    let _ = writeln!(s, "# reflect_fallbacks={}", r.reflect_fallbacks);
    let _ = writeln!(s, "# reflect_max_k={}", r.max_reflect_k);
    let _ = writeln!(s, "# triple_ties={}", r.triple_ties);
    let _ = writeln!(s, "# lambda_fallbacks={}", ranks.len());
    let _ = writeln!(s, "# lambda_fallback_ranks={}", ranks.join(" "));
    let _ = writeln!(s, "# recorded_time={}", format_number(r.elapsed));
    s.push_str(&cfg.to_text());
    s
}

pub fn fig1_svg(run: &RunArtifacts) -> String {
    let pts = |w: &[f64]| -> Vec<(f64, f64)> {
        w.iter().enumerate().map(|(k, &v)| ((k + 1) as f64, v)).collect()
    };
    Chart {
        title: "Capital distribution of the open market",
        x_label: "Rank",
        y_label: "Weight",
        log_x: true,
        log_y: true,
        series: vec![
            Series {
                label: "Simulated",
                color: "black",
                points: pts(&run.result.avg_ranked_weights),
            },
            Series {
                label: "First-order",
                color: "red",
                points: pts(&run.first_order),
            },
        ],
    }
    .render()
}

pub fn fig2_svg(run: &RunArtifacts) -> String {
    let snaps = &run.result.growth.snapshots;
    Chart {
        title: "Cumulative log-growth",
        x_label: "Time",
        y_label: "Log-growth",
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                label: "Market portfolio Z_mu",
                color: "black",
                points: snaps.iter().map(|s| (s.time, s.log_zmu)).collect(),
            },
            Series {
                label: "Capitalization X_[n]",
                color: "red",
                points: snaps.iter().map(|s| (s.time, s.log_topn)).collect(),
            },
        ],
    }
    .render()
}

#[derive(Debug, thiserror::Error)]
#[error("{path}: {source}")]
pub struct WriteError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Writes `files` (name, contents) into `dir` in order, creating it if needed.
pub fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, WriteError> {
    fs::create_dir_all(dir).map_err(|source| WriteError {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| WriteError {
            path: path.clone(),
            source,
        })?;
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}
