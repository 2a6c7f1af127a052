//! Desk-scale run (N = 55, n = 50, dt = 1e-3) with a summary of the
//! stability statistics. Usage: `cargo run --release --example desk_run [seed]`.

use std::time::Instant;

use numeraire_core::{first_order_weights, simulate, stability_report, DriftMode, ModelParams, SimulationSchedule};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let params = ModelParams::desk();
    let schedule = SimulationSchedule::new(200_000, 200_000, seed);
    let start = Instant::now();
    let result = simulate(&params, &schedule, DriftMode::B, None).expect("simulation");
    println!("runtime {:.2?}", start.elapsed());

    let report = stability_report(&result, &params).expect("report");
    let fo = first_order_weights(&params, &report.lambda).expect("first-order");
    let log_err: f64 = result
        .avg_ranked_weights
        .iter()
        .zip(&fo)
        .map(|(a, b)| (a.log10() - b.log10()).abs())
        .sum::<f64>()
        / fo.len() as f64;
    println!("max residual        {:e}", result.max_numeraire_residual);
    println!("mean |log10 diff|   {log_err:.4}");
    println!("coherence spread    {:.5}", report.coherence_spread);
    println!("occupancy L∞ · N    {:.4}", report.occupancy_uniformity * params.stocks as f64);
    println!("universe growth     {:.5}", result.growth.log_universe() / result.elapsed);
    println!("leakage             {:.6}", result.growth.leakage());
    println!("fallback ranks      {:?}", report.fallback_ranks);
    for k in 0..params.stocks - 1 {
        let c = report.lambda_crossover[k];
        let s = report.lambda_stationary[k];
        println!(
            "rank {:>3}  cross {:>9.5}  stat {:>9.5}  rel {:>7.3}  gap {:.4}  fo_gap {:.4}",
            k + 1,
            c,
            s,
            (c - s) / s,
            report.avg_gap[k],
            report.sigma2_gap[k] / (2.0 * report.lambda[k])
        );
    }
}
