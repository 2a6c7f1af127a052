//! Time-discretized paths of the rank-based universe.
//!
//! Each step, with ranks and weights taken from the current state:
//!
//! 1. every stock moves by its rank drift `g_k·dt` plus `s_k·√dt·Z_i`;
//! 2. in mode B the lowest stocks are reflected so the log caps gain the
//!    missing drift mass `budget·dt`;
//! 3. the common shock `S·√dt·Z_0` and growth `G·dt` are added to all;
//! 4. the state is renormalized and the removed log-total joins `growth_offset`.
//!
//! Local-time increments are read off between (1) and (2), from the
//! previous ranked weights and the drifted caps in previous rank order.

mod reflection;
mod shocks;

pub use reflection::{reflection_rebalance, Reflection};
pub use shocks::{GaussianShocks, ShockSource, ZeroShocks, GENERATOR_NAME};

use crate::analytics::{crossover_lt_increment, update_growth_ledger, GrowthLedger};
use crate::error::{MarketError, SimError};
use crate::market::{rank_drifts, rank_view, weights, weights_with_ranks, DriftVector, WeightVector};
use crate::numeraire::numeraire_residual_for;
use crate::params::{validate_params, DriftMode, ModelParams};
use crate::state::{log_sum_exp, UniverseState};

/// Per-step quantities needed by the ledgers.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// Local-time increment per boundary `k | k+1`; the last entry is zero.
    pub lt_increment: Vec<f64>,
    /// Increment of `log X_[n]`.
    pub dlog_topn: f64,
    /// Increment of the log total capitalization.
    pub dlog_universe: f64,
    /// Open-market weight of rank `n` before the step.
    pub mu_bottom: f64,
    pub reflect_k: usize,
    pub reflect_fallback: bool,
    pub triple_tie: bool,
}

/// One step with drifts from the numeraire rule.
pub fn step<S: ShockSource>(
    state: &UniverseState,
    params: &ModelParams,
    mode: DriftMode,
    shocks: &mut S,
) -> Result<(UniverseState, StepDiagnostics), MarketError> {
    let w = weights(state, params.open_size)?;
    let drifts = rank_drifts(&w, params, mode);
    let (next, diag, _) = advance(state, params, &w, &drifts, shocks)?;
    Ok((next, diag))
}

/// One step with caller-supplied drifts. Reflection runs when
/// `drifts.mode` is [`DriftMode::B`].
pub fn step_with_drifts<S: ShockSource>(
    state: &UniverseState,
    params: &ModelParams,
    drifts: &DriftVector,
    shocks: &mut S,
) -> Result<(UniverseState, StepDiagnostics), MarketError> {
    let w = weights(state, params.open_size)?;
    let (next, diag, _) = advance(state, params, &w, drifts, shocks)?;
    Ok((next, diag))
}

/// Core step; also returns the weights of the new state.
fn advance<S: ShockSource>(
    state: &UniverseState,
    params: &ModelParams,
    w: &WeightVector,
    drifts: &DriftVector,
    shocks: &mut S,
) -> Result<(UniverseState, StepDiagnostics, WeightVector), MarketError> {
    let stocks = state.len();
    if drifts.g.len() != stocks || params.idio_var.len() != stocks {
        return Err(MarketError::DimensionMismatch {
            expected: stocks,
            found: drifts.g.len(),
        });
    }
    let dt = params.dt;
    let sqrt_dt = dt.sqrt();
    let prev_total = log_sum_exp(&state.logcap);

    let mut z = vec![0.0; stocks];
    shocks.idiosyncratic(&mut z);
    let mut x = state.logcap.clone();
    for (i, xi) in x.iter_mut().enumerate() {
        let k = w.ranks.rank[i];
        *xi += drifts.g[k] * dt + params.idio_var[k].sqrt() * sqrt_dt * z[i];
    }

    let prev_ranked = w.zeta_ranked();
    let post_caps: Vec<f64> = w
        .ranks
        .stock
        .iter()
        .map(|&i| (x[i] - prev_total).exp())
        .collect();
    let lt_increment = crossover_lt_increment(&prev_ranked, &post_caps)?;

    let (reflect_k, reflect_fallback, triple_tie) = match drifts.mode {
        DriftMode::B => {
            let r = reflection_rebalance(&x, drifts.budget * dt);
            x = r.logcap;
            (r.k, r.fallback, r.triple_tie)
        }
        DriftMode::A => (0, false, false),
    };

    let shift = params.growth * dt + params.common_var.sqrt() * sqrt_dt * shocks.common();
    for xi in &mut x {
        *xi += shift;
    }

    let mut next = UniverseState::new(x, state.growth_offset, state.time + dt);
    next.check_finite()?;
    let total = next.normalize();
    let dlog_universe = total - prev_total;

    let next_ranks = rank_view(&next.logcap)?;
    let next_w = weights_with_ranks(&next, next_ranks, params.open_size)?;
    let dlog_topn = (next_w.topn_cap.ln() - w.topn_cap.ln()) + dlog_universe;

    let diag = StepDiagnostics {
        lt_increment,
        dlog_topn,
        dlog_universe,
        mu_bottom: w.mu_bottom(),
        reflect_k,
        reflect_fallback,
        triple_tie,
    };
    Ok((next, diag, next_w))
}

/// Burn-in and recording lengths plus the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationSchedule {
    pub burn_steps: u64,
    pub record_steps: u64,
    pub seed: u64,
    /// Growth snapshots are taken every this many recorded steps.
    pub snapshot_stride: u64,
}

impl SimulationSchedule {
    pub fn new(burn_steps: u64, record_steps: u64, seed: u64) -> Self {
        Self {
            burn_steps,
            record_steps,
            seed,
            snapshot_stride: 1000,
        }
    }

    pub fn with_stride(mut self, stride: u64) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn total_steps(&self) -> u64 {
        self.burn_steps + self.record_steps
    }

    fn check(&self) -> Result<(), SimError> {
        if self.record_steps == 0 {
            return Err(SimError::Schedule("record_steps must be at least 1"));
        }
        if self.snapshot_stride == 0 {
            return Err(SimError::Schedule("snapshot_stride must be at least 1"));
        }
        Ok(())
    }
}

impl Default for SimulationSchedule {
    /// One million burn-in and one million recorded steps.
    fn default() -> Self {
        Self::new(1_000_000, 1_000_000, 42)
    }
}

/// Visit counts of (stock, rank) pairs, row-major by stock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    stocks: usize,
    counts: Vec<u64>,
}

impl Occupancy {
    pub fn new(stocks: usize) -> Self {
        Self {
            stocks,
            counts: vec![0; stocks * stocks],
        }
    }

    pub fn stocks(&self) -> usize {
        self.stocks
    }

    pub fn get(&self, stock: usize, rank: usize) -> u64 {
        self.counts[stock * self.stocks + rank]
    }

    pub fn row(&self, stock: usize) -> &[u64] {
        &self.counts[stock * self.stocks..(stock + 1) * self.stocks]
    }

    fn record(&mut self, rank_of_stock: &[usize]) {
        for (i, &k) in rank_of_stock.iter().enumerate() {
            self.counts[i * self.stocks + k] += 1;
        }
    }

    fn absorb(&mut self, other: &Occupancy) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Max over stocks of `max_k |p_i(k) − 1/N|`.
    pub fn uniformity_distance(&self) -> f64 {
        let uniform = 1.0 / self.stocks as f64;
        (0..self.stocks)
            .map(|i| {
                let row = self.row(i);
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| (c as f64 / total as f64 - uniform).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Everything recorded over the recording phase of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub mode: DriftMode,
    pub seed: u64,
    pub stream: u64,
    pub generator: &'static str,
    pub burn_steps: u64,
    pub record_steps: u64,
    /// Recorded model time.
    pub elapsed: f64,
    /// Time-averaged open-market weights by rank, length `n`.
    pub avg_ranked_weights: Vec<f64>,
    /// Time-averaged applied drift by rank, length `N`.
    pub avg_drifts: Vec<f64>,
    /// Time-averaged `log(X_(k)/X_(k+1))`, length `N − 1`.
    pub avg_log_gaps: Vec<f64>,
    /// Accumulated crossover local time by boundary, length `N`.
    pub lt_crossover: Vec<f64>,
    pub growth: GrowthLedger,
    pub occupancy: Occupancy,
    pub final_state: UniverseState,
    /// `t⁻¹ log(X_i/X_1)` at the end, `t` the total model time of the path.
    pub coherence: Vec<f64>,
    /// Largest `|α_i − σ_{iμ}|` seen over recorded steps.
    pub max_numeraire_residual: f64,
    pub reflect_fallbacks: u64,
    pub triple_ties: u64,
    pub max_reflect_k: usize,
    /// Number of merged replicas (1 for a single run).
    pub replicas: usize,
}

/// Runs the universe forward under a fixed drift mode.
#[derive(Debug, Clone, Copy)]
pub struct Simulator<'a> {
    params: &'a ModelParams,
    mode: DriftMode,
    allow_invalid: bool,
}

impl<'a> Simulator<'a> {
    pub fn new(params: &'a ModelParams, mode: DriftMode) -> Self {
        Self {
            params,
            mode,
            allow_invalid: false,
        }
    }

    /// Accept parameters that fail [`validate_params`].
    pub fn allow_invalid(mut self, allow: bool) -> Self {
        self.allow_invalid = allow;
        self
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    pub fn mode(&self) -> DriftMode {
        self.mode
    }

    pub fn run(
        &self,
        schedule: &SimulationSchedule,
        initial: Option<UniverseState>,
    ) -> Result<SimulationResult, SimError> {
        self.run_stream(schedule, 0, initial)
    }

    /// Gaussian run on ChaCha stream `stream` of `schedule.seed`.
    pub fn run_stream(
        &self,
        schedule: &SimulationSchedule,
        stream: u64,
        initial: Option<UniverseState>,
    ) -> Result<SimulationResult, SimError> {
        let mut shocks = GaussianShocks::new(schedule.seed, stream);
        let mut result = self.run_with(schedule, initial, &mut shocks)?;
        result.stream = stream;
        Ok(result)
    }

    pub fn run_with<S: ShockSource>(
        &self,
        schedule: &SimulationSchedule,
        initial: Option<UniverseState>,
        shocks: &mut S,
    ) -> Result<SimulationResult, SimError> {
        let params = self.params;
        let report = validate_params(params)?;
        if !report.valid && !self.allow_invalid {
            return Err(SimError::Invalid(report));
        }
        schedule.check()?;

        let stocks = params.stocks;
        let n = params.open_size;
        let mut state = initial.unwrap_or_else(|| UniverseState::zipf(stocks));
        if state.len() != stocks {
            return Err(SimError::InitialState {
                expected: stocks,
                found: state.len(),
            });
        }
        let fault = |step: u64, source: MarketError| SimError::Fault {
            step,
            seed: schedule.seed,
            source,
        };
        state.check_finite().map_err(|e| fault(0, e))?;
        let mut w = weights(&state, n).map_err(|e| fault(0, e))?;

        let mut sum_weights = vec![0.0; n];
        let mut sum_drifts = vec![0.0; stocks];
        let mut sum_gaps = vec![0.0; stocks - 1];
        let mut lt = vec![0.0; stocks];
        let mut growth = GrowthLedger::new();
        let mut occupancy = Occupancy::new(stocks);
        let mut max_residual: f64 = 0.0;
        let (mut fallbacks, mut ties, mut max_k) = (0u64, 0u64, 0usize);

        let total = schedule.total_steps();
        let progress_every = (total / 10).max(1);
        for t in 0..total {
            let recording = t >= schedule.burn_steps;
            if recording && t == schedule.burn_steps {
                growth.snapshot(0.0);
            }
            let drifts = rank_drifts(&w, params, self.mode);
            if recording {
                let r = numeraire_residual_for(&w, params, 1.0).map_err(|e| fault(t, e))?;
                max_residual = max_residual.max(r.max_abs);
            }
            let (next, diag, next_w) =
                advance(&state, params, &w, &drifts, shocks).map_err(|e| fault(t, e))?;

            if diag.reflect_fallback {
                fallbacks += 1;
            }
            if diag.triple_tie {
                ties += 1;
            }
            max_k = max_k.max(diag.reflect_k);

            if recording {
                update_growth_ledger(
                    &mut growth,
                    diag.dlog_topn,
                    diag.mu_bottom,
                    diag.lt_increment[n - 1],
                )
                .map_err(|e| fault(t, e.into()))?;
                growth.add_universe(diag.dlog_universe);
                for (acc, d) in lt.iter_mut().zip(&diag.lt_increment) {
                    *acc += d;
                }
                for (acc, g) in sum_drifts.iter_mut().zip(&drifts.g) {
                    *acc += g;
                }
                let ranked = &next_w.ranks.stock;
                for (k, &i) in ranked[..n].iter().enumerate() {
                    sum_weights[k] += next_w.mu[i];
                }
                for k in 0..stocks - 1 {
                    sum_gaps[k] += next.logcap[ranked[k]] - next.logcap[ranked[k + 1]];
                }
                occupancy.record(&next_w.ranks.rank);

                let recorded = t - schedule.burn_steps + 1;
                if recorded.is_multiple_of(schedule.snapshot_stride) || recorded == schedule.record_steps {
                    growth.snapshot(recorded as f64 * params.dt);
                }
            }
            if (t + 1) % progress_every == 0 {
                log::debug!("step {}/{}", t + 1, total);
            }
            state = next;
            w = next_w;
        }

        let steps = schedule.record_steps as f64;
        let coherence = state
            .logcap
            .iter()
            .map(|x| (x - state.logcap[0]) / state.time)
            .collect();
        Ok(SimulationResult {
            mode: self.mode,
            seed: schedule.seed,
            stream: 0,
            generator: shocks.name(),
            burn_steps: schedule.burn_steps,
            record_steps: schedule.record_steps,
            elapsed: steps * params.dt,
            avg_ranked_weights: sum_weights.iter().map(|s| s / steps).collect(),
            avg_drifts: sum_drifts.iter().map(|s| s / steps).collect(),
            avg_log_gaps: sum_gaps.iter().map(|s| s / steps).collect(),
            lt_crossover: lt,
            growth,
            occupancy,
            final_state: state,
            coherence,
            max_numeraire_residual: max_residual,
            reflect_fallbacks: fallbacks,
            triple_ties: ties,
            max_reflect_k: max_k,
            replicas: 1,
        })
    }
}

/// Gaussian run from `initial` (Zipf when `None`) on stream 0 of the seed.
pub fn simulate(
    params: &ModelParams,
    schedule: &SimulationSchedule,
    mode: DriftMode,
    initial: Option<UniverseState>,
) -> Result<SimulationResult, SimError> {
    Simulator::new(params, mode).run(schedule, initial)
}

/// Averages replica results recorded under the same parameters and schedule.
///
/// Counts and local times are summed, time averages and growth ledgers are
/// averaged, the final state is that of the first replica.
pub fn merge_results(results: &[SimulationResult]) -> Option<SimulationResult> {
    let first = results.first()?;
    let m = results.len() as f64;
    let mean = |f: &dyn Fn(&SimulationResult) -> &Vec<f64>| -> Vec<f64> {
        let mut acc = vec![0.0; f(first).len()];
        for r in results {
            for (a, x) in acc.iter_mut().zip(f(r)) {
                *a += x;
            }
        }
        acc.iter().map(|a| a / m).collect()
    };

    let mut lt = vec![0.0; first.lt_crossover.len()];
    let mut occupancy = Occupancy::new(first.occupancy.stocks());
    for r in results {
        for (a, x) in lt.iter_mut().zip(&r.lt_crossover) {
            *a += x;
        }
        occupancy.absorb(&r.occupancy);
    }

    let avg = |f: &dyn Fn(&GrowthLedger) -> f64| results.iter().map(|r| f(&r.growth)).sum::<f64>() / m;
    let mut growth = GrowthLedger::at(
        avg(&|g| g.log_topn()),
        avg(&|g| g.log_zmu()),
        avg(&|g| g.log_universe()),
        avg(&|g| g.leakage()),
    );
    growth.snapshots = first
        .growth
        .snapshots
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let mut out = *s;
            let pick = |f: &dyn Fn(&crate::analytics::GrowthSnapshot) -> f64| {
                results.iter().map(|r| f(&r.growth.snapshots[j])).sum::<f64>() / m
            };
            out.log_topn = pick(&|s| s.log_topn);
            out.log_zmu = pick(&|s| s.log_zmu);
            out.log_universe = pick(&|s| s.log_universe);
            out
        })
        .collect();

    Some(SimulationResult {
        mode: first.mode,
        seed: first.seed,
        stream: first.stream,
        generator: first.generator,
        burn_steps: first.burn_steps,
        record_steps: results.iter().map(|r| r.record_steps).sum(),
        elapsed: results.iter().map(|r| r.elapsed).sum(),
        avg_ranked_weights: mean(&|r| &r.avg_ranked_weights),
        avg_drifts: mean(&|r| &r.avg_drifts),
        avg_log_gaps: mean(&|r| &r.avg_log_gaps),
        lt_crossover: lt,
        growth,
        occupancy,
        final_state: first.final_state.clone(),
        coherence: mean(&|r| &r.coherence),
        max_numeraire_residual: results
            .iter()
            .map(|r| r.max_numeraire_residual)
            .fold(0.0, f64::max),
        reflect_fallbacks: results.iter().map(|r| r.reflect_fallbacks).sum(),
        triple_ties: results.iter().map(|r| r.triple_ties).sum(),
        max_reflect_k: results.iter().map(|r| r.max_reflect_k).max().unwrap_or(0),
        replicas: results.iter().map(|r| r.replicas).sum(),
    })
}
