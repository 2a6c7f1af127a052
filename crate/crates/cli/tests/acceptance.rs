//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed here and never tuned to a run.
//!
//! Desk configuration for criteria 1 and 3–7: N = 55, n = 50, s² = 0.06,
//! S² = 0.04, G = 0.051, dt = 1e-3, 2×10⁵ burn + 2×10⁵ record steps, seed 42.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use numeraire_cli::{parse_config, run, Command, SimConfig};
use numeraire_core::verify::{dense_optimality_suite, OptimalityConfig};
use numeraire_core::{
    crossover_lt_increment, first_order_weights, reflection_rebalance, simulate,
    stability_report, stationary_local_time, DriftMode, ModelParams, SimulationResult,
    SimulationSchedule, StabilityReport,
};

const DESK_SEED: u64 = 42;
const DESK_BURN: u64 = 200_000;
const DESK_RECORD: u64 = 200_000;

struct Desk {
    params: ModelParams,
    result: SimulationResult,
    report: StabilityReport,
    runtime: Duration,
}

fn desk() -> Desk {
    let params = ModelParams::desk();
    let schedule = SimulationSchedule::new(DESK_BURN, DESK_RECORD, DESK_SEED);
    let t = Instant::now();
    let result = simulate(&params, &schedule, DriftMode::B, None).expect("desk run");
    let runtime = t.elapsed();
    let report = stability_report(&result, &params).expect("desk report");
    Desk {
        params,
        result,
        report,
        runtime,
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn numeraire_identity(d: &Desk) -> Outcome {
    let r = d.result.max_numeraire_residual;
    let secs = d.runtime.as_secs_f64();
    outcome(
        r < 1e-12 && secs < 10.0,
        format!("max |alpha_i - sigma_imu| = {r:.3e} (< 1e-12), runtime {secs:.2} s (< 10 s)"),
    )
}

fn numeraire_optimality() -> Outcome {
    let cfg = OptimalityConfig::default();
    let t = Instant::now();
    let summary = dense_optimality_suite(&cfg).expect("optimality suite");
    let secs = t.elapsed().as_secs_f64();
    let excess = summary.worst_excess();
    let half = summary.worst_half_dot_error();
    outcome(
        summary.checks.len() == 100
            && summary.passes(1e-9, 1e-10)
            && summary.checks.iter().all(|c| c.dim <= 4)
            && secs < 5.0,
        format!(
            "{} markets x {} perturbations: worst gamma(pi) - gamma(nu) = {excess:.3e} (<= 1e-9), \
             |gamma_nu - alpha.nu/2| = {half:.3e} (<= 1e-10), runtime {secs:.2} s (< 5 s)",
            cfg.markets, cfg.perturbations
        ),
    )
}

fn domination(d: &Desk) -> Outcome {
    let g = &d.result.growth;
    let below = g
        .snapshots
        .iter()
        .filter(|s| s.log_topn < s.log_zmu)
        .count();
    let gap = g.log_topn() - g.log_zmu();
    let identity = (gap - g.leakage()).abs();
    outcome(
        below == 0 && gap > 0.0 && identity <= 1e-12,
        format!(
            "{} snapshots, {below} with log X_[n] < log Z_mu; terminal gap {gap:.6} (> 0); \
             |gap - leakage| = {identity:.3e} (<= 1e-12)",
            g.snapshots.len()
        ),
    )
}

fn capital_distribution(d: &Desk) -> Outcome {
    let fo = match first_order_weights(&d.params, &d.report.lambda) {
        Ok(w) => w,
        Err(e) => return outcome(false, format!("first-order curve unavailable: {e}")),
    };
    let sim = &d.result.avg_ranked_weights;
    let err = sim
        .iter()
        .zip(&fo)
        .map(|(a, b)| (a.log10() - b.log10()).abs())
        .sum::<f64>()
        / fo.len() as f64;
    let secs = d.runtime.as_secs_f64();
    outcome(
        err < 0.15 && secs < 60.0,
        format!(
            "mean |log10 mu_sim - log10 mu_fo| over ranks 1..{} = {err:.4} (< 0.15); \
             top weight {:.4}; runtime {secs:.2} s (< 60 s)",
            fo.len(),
            sim[0]
        ),
    )
}

fn stability(d: &Desk) -> Outcome {
    let r = &d.report;
    let positive = r.all_lambda_positive();
    // interior boundaries 5..45 (1-based), relative to the stationary rate
    let worst_rel = (4..45)
        .map(|k| ((r.lambda_crossover[k] - r.lambda_stationary[k]) / r.lambda_stationary[k]).abs())
        .fold(0.0, f64::max);
    let coherence = r.coherence_spread;
    outcome(
        positive && worst_rel <= 0.2 && coherence < 0.02,
        format!(
            "all lambda > 0: {positive}; worst crossover/stationary disagreement on ranks 5..45 = \
             {:.1}% (<= 20%); coherence max |t^-1 log(X_i/X_j)| = {coherence:.4} (< 0.02)",
            worst_rel * 100.0
        ),
    )
}

fn exchangeability(d: &Desk) -> Outcome {
    let n = d.params.stocks as f64;
    let dist = d.report.occupancy_uniformity;
    outcome(
        dist < 0.5 / n,
        format!(
            "max L-inf distance from uniform = {dist:.5} (< 0.5/N = {:.5}; x N = {:.2})",
            0.5 / n,
            dist * n
        ),
    )
}

fn universe_growth(d: &Desk) -> Outcome {
    let rate = d.result.growth.log_universe() / d.result.elapsed;
    let g = d.params.growth;
    outcome(
        (rate - g).abs() <= 0.05,
        format!("recorded growth rate {rate:.4} (G = {g} +/- 0.05)"),
    )
}

fn closed_market() -> Outcome {
    let params = ModelParams::uniform(55, 55, 0.06, 0.04, 0.051, 1e-3);
    let schedule = SimulationSchedule::new(0, 10_000, DESK_SEED).with_stride(100);
    let r = simulate(&params, &schedule, DriftMode::B, None).expect("closed run");
    let g = &r.growth;
    let differing = g
        .snapshots
        .iter()
        .filter(|s| s.log_topn != s.log_zmu)
        .count();
    outcome(
        differing == 0 && g.log_topn() == g.log_zmu() && g.leakage() == 0.0,
        format!(
            "n = N = 55, 10^4 steps: {differing} of {} snapshots differ; terminal log X_[n] = {:.12}, log Z_mu = {:.12}",
            g.snapshots.len(),
            g.log_topn(),
            g.log_zmu()
        ),
    )
}

fn desk_config() -> SimConfig {
    parse_config(
        &format!(
            "N=55\nn=50\ndt=1e-3\nburn_steps={DESK_BURN}\nrecord_steps={DESK_RECORD}\nseed={DESK_SEED}\n"
        ),
        &[],
    )
    .expect("desk config")
}

fn reproduction() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut cfg = desk_config();
    let mut out = Vec::new();
    for run_dir in ["a", "b"] {
        cfg.out_dir = dir.path().join(run_dir);
        run(Command::Simulate, &cfg).expect("simulate");
        out.push(cfg.out_dir.clone());
    }
    let differing: Vec<&str> = ["weights.csv", "growth.csv", "stability.csv"]
        .into_iter()
        .filter(|f| std::fs::read(out[0].join(f)).unwrap() != std::fs::read(out[1].join(f)).unwrap())
        .collect();
    outcome(
        differing.is_empty(),
        format!("two seed-{DESK_SEED} desk runs via `simulate`; byte-differing files: {differing:?}"),
    )
}

fn unit_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut check = |got: f64, want: f64| worst = worst.max((got - want).abs());

    let inc = crossover_lt_increment(&[0.6, 0.4], &[0.38, 0.42]).expect("crossover");
    check(inc[0], 2.0 * 0.04 / 0.6);
    check(inc[1], 0.0);

    let a = reflection_rebalance(&[0.0, -1.0, -2.0], 0.1);
    check(a.k as f64, 1.0);
    check(a.pivot, -3.9);
    for (x, want) in a.logcap.iter().zip([0.0, -1.0, -1.9]) {
        check(*x, want);
    }
    let b = reflection_rebalance(&[0.0, -1.0, -2.0], 3.0);
    check(b.k as f64, 2.0);
    check(b.pivot, -1.5);
    for (x, want) in b.logcap.iter().zip([0.0, 0.5, -0.5]) {
        check(*x, want);
    }

    let lam = stationary_local_time(&[-0.0235, -0.0385, 0.062]);
    for (x, want) in lam.iter().zip([0.047, 0.124, 0.0]) {
        check(*x, want);
    }

    // gaps 0.12/(2·0.12) = 0.5 and 0.12/(2·0.06) = 1: weights ∝ (e^1.5, e^1, 1)
    let p = ModelParams::uniform(4, 3, 0.06, 0.04, 0.051, 1e-3);
    let fo = first_order_weights(&p, &[0.12, 0.06, 0.1]).expect("first order");
    let raw = [1.5f64.exp(), 1f64.exp(), 1.0];
    let total: f64 = raw.iter().sum();
    for (x, r) in fo.iter().zip(raw) {
        check(*x, r / total);
    }

    outcome(
        worst <= 1e-9,
        format!(
            "worst deviation from hand-derived values {worst:.3e} (<= 1e-9); first-order weights ({:.4}, {:.4}, {:.4})",
            fo[0], fo[1], fo[2]
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let d = desk();
    println!(
        "desk run: N=55 n=50 dt=1e-3 burn={DESK_BURN} record={DESK_RECORD} seed={DESK_SEED} ({:.2} s)",
        d.runtime.as_secs_f64()
    );
    let criteria: Vec<(&str, Outcome)> = vec![
        ("numeraire identity", numeraire_identity(&d)),
        ("numeraire optimality oracle", numeraire_optimality()),
        ("domination", domination(&d)),
        ("capital-distribution match", capital_distribution(&d)),
        ("stability statistics", stability(&d)),
        ("exchangeability", exchangeability(&d)),
        ("universe growth", universe_growth(&d)),
        ("closed-market degeneration", closed_market()),
        ("determinism and reproduction", reproduction()),
        ("estimator unit identities", unit_identities()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in criteria.iter().enumerate() {
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1} s)",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
