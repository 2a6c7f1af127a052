//! Prints the extended weight of rank 1 along a path.
//! Usage: `cargo run --release --example top_weight_trace [seed] [N] [n] [dt] [steps]`.

use numeraire_core::{step, weights, DriftMode, GaussianShocks, ModelParams, UniverseState};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let arg = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let seed = arg(1, 42.0) as u64;
    let stocks = arg(2, 55.0) as usize;
    let open = arg(3, 50.0) as usize;
    let dt = arg(4, 1e-3);
    let steps = arg(5, 400_000.0) as u64;
    let params = ModelParams::uniform(stocks, open, 0.06, 0.04, 0.051, dt);
    let mut state = UniverseState::zipf(stocks);
    let mut shocks = GaussianShocks::new(seed, 0);
    let every = steps / 40;
    for t in 0..steps {
        if t % every == 0 {
            let w = weights(&state, open).unwrap();
            let m = w.mu_tilde_ranked();
            println!("t={:>8.1} mu1={:.4} mu2={:.4} leader={}", state.time, m[0], m[1], w.ranks.stock[0]);
        }
        state = step(&state, &params, DriftMode::B, &mut shocks).unwrap().0;
    }
}
