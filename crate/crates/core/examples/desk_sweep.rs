//! Desk-scale statistics over independent replicas (streams of one seed).
//! Usage: `cargo run --release --example desk_sweep [replicas] [seed] [record_steps]`.

use numeraire_core::parallel::simulate_replicas;
use numeraire_core::{first_order_weights, stability_report, DriftMode, ModelParams, SimulationSchedule, Simulator};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let replicas = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(42);
    let record = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let params = ModelParams::desk();
    let schedule = SimulationSchedule::new(200_000, record, seed);
    let sim = Simulator::new(&params, DriftMode::B);
    let results = simulate_replicas(&sim, &schedule, replicas, None).expect("simulation");
    println!("stream  top_w  logerr  coher   occ*N  worst_rel(5..45)  growth");
    for r in &results {
        let rep = stability_report(r, &params).unwrap();
        let fo = first_order_weights(&params, &rep.lambda).unwrap();
        let err = r.avg_ranked_weights.iter().zip(&fo).map(|(a, b)| (a.log10() - b.log10()).abs()).sum::<f64>() / fo.len() as f64;
        let rel = (4..45)
            .map(|k| ((rep.lambda_crossover[k] - rep.lambda_stationary[k]) / rep.lambda_stationary[k]).abs())
            .fold(0.0, f64::max);
        println!(
            "{:>6}  {:.3}  {:.4}  {:.4}  {:>6.2}  {:.3}  {:.4}",
            r.stream,
            r.avg_ranked_weights[0],
            err,
            rep.coherence_spread,
            rep.occupancy_uniformity * 55.0,
            rel,
            r.growth.log_universe() / r.elapsed
        );
    }
}
