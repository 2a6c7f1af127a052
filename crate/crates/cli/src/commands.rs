use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::dmatrix;
use numeraire_core::verify::{
    dense_optimality_suite, residual_identity, structured_vs_dense, OptimalityConfig,
};
use numeraire_core::{
    first_order_weights, merge_results, numeraire_weights, simulate_replicas, stability_report,
    CovarianceModel, EstimatorError, MarketError, SimError, Simulator, UniverseState,
};
use thiserror::Error;

use crate::config::{format_number, ConfigError, SimConfig};
use crate::output::{self, RunArtifacts, WriteError};

/// Growth-optimality slack and `γ_ν = ½αᵀν` tolerance for `verify`.
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const HALF_DOT_TOL: f64 = 1e-10;
/// Numeraire-market residual bound.
pub const RESIDUAL_TOL: f64 = 1e-12;
pub const STRUCTURED_DENSE_TOL: f64 = 1e-10;
/// Steps of the residual-identity path in `verify`.
pub const RESIDUAL_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Verify,
    Report,
    Chart,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Command::Simulate),
            "verify" => Ok(Command::Verify),
            "report" => Ok(Command::Report),
            "chart" => Ok(Command::Chart),
            other => Err(format!("unknown subcommand '{other}'")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] SimError),
    #[error("estimator: {0}")]
    Estimator(#[from] EstimatorError),
    #[error("market: {0}")]
    Market(#[from] MarketError),
    #[error("verification failed: {failed}")]
    Verify { failed: String, report: String },
    #[error("write {0}")]
    Write(#[from] WriteError),
    #[error("read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 I/O, 2 config error, 3 validation failure, 4 engine fault.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Validation { .. }) => 3,
            CliError::Engine(SimError::Invalid(_)) => 3,
            CliError::Config(_) => 2,
            CliError::Engine(SimError::Params(_)) => 2,
            CliError::Engine(_) | CliError::Estimator(_) | CliError::Market(_) => 4,
            CliError::Verify { .. } => 4,
            CliError::Write(_) | CliError::Read { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(ConfigError::Validation { .. }) | CliError::Engine(SimError::Invalid(_)) => {
                "validation"
            }
            CliError::Config(_) | CliError::Engine(SimError::Params(_)) => "config",
            CliError::Engine(_) | CliError::Estimator(_) | CliError::Market(_) => "engine",
            CliError::Verify { .. } => "verify",
            CliError::Write(_) | CliError::Read { .. } => "io",
        }
    }

    /// Single-line `key=value` form for stderr, e.g.
    /// `error code=2 kind=config line=3 message="line 3: unknown key 'x'"`.
    pub fn machine_line(&self) -> String {
        let mut s = format!("error code={} kind={}", self.exit_code(), self.kind());
        match self {
            CliError::Config(ConfigError::Parse { line, .. })
            | CliError::Config(ConfigError::UnknownKey { line, .. }) => {
                if *line == 0 {
                    s.push_str(" source=flag");
                } else {
                    let _ = write!(s, " line={line}");
                }
            }
            CliError::Engine(SimError::Fault { step, seed, .. }) => {
                let _ = write!(s, " step={step} seed={seed}");
            }
            _ => {}
        }
        if let CliError::Config(e) = self {
            if let Some(key) = e.key() {
                let _ = write!(s, " key={key}");
            }
        }
        let msg = self.to_string().replace('\\', "\\\\").replace('"', "\\\"");
        let _ = write!(s, " message=\"{msg}\"");
        s
    }
}

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    /// Human-readable text for stdout.
    pub text: String,
    pub files: Vec<PathBuf>,
}

/// Runs all replicas of `cfg` and derives the report and first-order curve.
pub fn simulate_config(cfg: &SimConfig) -> Result<RunArtifacts, CliError> {
    cfg.validate()?;
    let params = cfg.params();
    let sim = Simulator::new(&params, cfg.mode).allow_invalid(cfg.allow_invalid);
    let runs = simulate_replicas(&sim, &cfg.schedule(), cfg.replicas, None::<&UniverseState>)?;
    let result = merge_results(&runs).expect("at least one replica");
    let report = stability_report(&result, &params)?;
    let first_order = first_order_weights(&params, &report.lambda)?;
    Ok(RunArtifacts {
        result,
        report,
        first_order,
    })
}

pub fn run(cmd: Command, cfg: &SimConfig) -> Result<Outcome, CliError> {
    match cmd {
        Command::Simulate => {
            let run = simulate_config(cfg)?;
            let mut files = vec![
                ("weights.csv", output::weights_csv(&run)),
                ("growth.csv", output::growth_csv(&run)),
                ("stability.csv", output::stability_csv(&run)),
                ("meta.txt", output::meta_txt(cfg, &run)),
            ];
            if cfg.charts {
                files.push(("fig1.svg", output::fig1_svg(&run)));
                files.push(("fig2.svg", output::fig2_svg(&run)));
            }
            let files = output::write_files(&cfg.out_dir, &files)?;
            Ok(Outcome {
                text: summary(&run),
                files,
            })
        }
        Command::Chart => {
            let run = simulate_config(cfg)?;
            let files = output::write_files(
                &cfg.out_dir,
                &[
                    ("fig1.svg", output::fig1_svg(&run)),
                    ("fig2.svg", output::fig2_svg(&run)),
                ],
            )?;
            Ok(Outcome {
                text: summary(&run),
                files,
            })
        }
        Command::Report => {
            let run = simulate_config(cfg)?;
            Ok(Outcome {
                text: report_text(cfg, &run),
                files: Vec::new(),
            })
        }
        Command::Verify => verify(cfg),
    }
}

fn summary(run: &RunArtifacts) -> String {
    let r = &run.result;
    let g = &r.growth;
    format!(
        "recorded_time={} replicas={} residual_max={:.3e} log_topn={:.6} log_zmu={:.6} \
         log_universe={:.6} lambda_fallbacks={} reflect_fallbacks={}\n",
        r.elapsed,
        r.replicas,
        r.max_numeraire_residual,
        g.log_topn(),
        g.log_zmu(),
        g.log_universe(),
        run.report.fallback_ranks.len(),
        r.reflect_fallbacks
    )
}

pub fn report_text(cfg: &SimConfig, run: &RunArtifacts) -> String {
    let r = &run.report;
    let res = &run.result;
    let n = cfg.stocks as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "stability report: N={} n={} mode={} seed={} replicas={} recorded_time={}",
        cfg.stocks,
        cfg.open_size,
        cfg.mode.as_str(),
        cfg.seed,
        res.replicas,
        res.elapsed
    );
    let _ = writeln!(s, "coherence_spread={:.6e}  (max |t^-1 log(X_i/X_j)|)", r.coherence_spread);
    let _ = writeln!(
        s,
        "occupancy_uniformity={:.6e}  (x N = {:.4})",
        r.occupancy_uniformity,
        r.occupancy_uniformity * n
    );
    let _ = writeln!(s, "all_lambda_positive={}", r.all_lambda_positive());
    let fallbacks: Vec<String> = r.fallback_ranks.iter().map(|k| (k + 1).to_string()).collect();
    let _ = writeln!(s, "lambda_fallback_ranks=[{}]", fallbacks.join(","));
    let _ = writeln!(
        s,
        "universe_growth_rate={:.6}",
        res.growth.log_universe() / res.elapsed
    );
    let _ = writeln!(s, "residual_max={:.3e}", res.max_numeraire_residual);
    if r.closed_market {
        let _ = writeln!(s, "closed market: the boundary below rank n is undefined");
    }
    let _ = writeln!(
        s,
        "{:>5} {:>14} {:>14} {:>14} {:>10} {:>12}",
        "rank", "lambda_cross", "lambda_stat", "lambda_final", "sigma2_gap", "avg_gap"
    );
    for k in 0..r.lambda.len() {
        let _ = writeln!(
            s,
            "{:>5} {:>14.6e} {:>14.6e} {:>14.6e} {:>10.4} {:>12.6e}",
            k + 1,
            r.lambda_crossover[k],
            r.lambda_stationary[k],
            r.lambda[k],
            r.sigma2_gap[k],
            r.avg_gap[k]
        );
    }
    s
}

fn verify(cfg: &SimConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let params = cfg.params();
    let mut text = String::new();
    let mut failed = Vec::new();
    let mut line = |name: &str, ok: bool, detail: String| {
        let _ = writeln!(text, "{} {name} {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(name.to_string());
        }
    };

    // two-stock hand example: Σν = α by Cramer's rule
    let cov = CovarianceModel::dense(dmatrix![0.04, 0.01; 0.01, 0.09])?;
    let nu = numeraire_weights(&[0.05, 0.02], &cov)?;
    let err = (nu.pi[0] - 43.0 / 35.0).abs().max((nu.pi[1] - 3.0 / 35.0).abs());
    line("two_stock_example", err < 1e-12, format!("max_error={err:.3e}"));

    let opt = OptimalityConfig {
        seed: cfg.seed,
        ..OptimalityConfig::default()
    };
    let suite = dense_optimality_suite(&opt)?;
    line(
        "numeraire_optimality",
        suite.passes(OPTIMALITY_TOL, HALF_DOT_TOL),
        format!(
            "markets={} perturbations={} worst_excess={:.3e} half_dot_error={:.3e}",
            opt.markets,
            opt.perturbations,
            suite.worst_excess(),
            suite.worst_half_dot_error()
        ),
    );

    let residual = residual_identity(&params, RESIDUAL_STEPS, cfg.seed)?;
    line(
        "residual_identity",
        residual < RESIDUAL_TOL,
        format!("steps={RESIDUAL_STEPS} residual_max={}", format_number(residual)),
    );

    let diff = structured_vs_dense(&params, &UniverseState::zipf(params.stocks))?;
    line(
        "structured_vs_dense",
        diff < STRUCTURED_DENSE_TOL,
        format!("max_rel_diff={diff:.3e}"),
    );

    if failed.is_empty() {
        text.push_str("verify: all checks passed\n");
        Ok(Outcome {
            text,
            files: Vec::new(),
        })
    } else {
        Err(CliError::Verify {
            failed: failed.join(","),
            report: text,
        })
    }
}
