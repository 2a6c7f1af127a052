//! Local-time estimators, the first-order capital distribution, growth
//! ledgers and the asymptotic-stability report.

use crate::engine::SimulationResult;
use crate::error::EstimatorError;
use crate::params::ModelParams;
use crate::sum::CompensatedSum;

/// Local-time increments at every rank boundary from one reordering.
///
/// `prev_weights_ranked[k]` is the weight of the stock that held rank `k`
/// before the move; `post_caps[k]` is that same stock's capitalization after
/// the move (same units as the weights). For boundary `k | k+1` the increment
/// is `2·(top-k sum after re-sorting − top-k sum in the old order) / prev_weight_(k)`.
/// The bottom entry is always zero.
pub fn crossover_lt_increment(
    prev_weights_ranked: &[f64],
    post_caps: &[f64],
) -> Result<Vec<f64>, EstimatorError> {
    let n = prev_weights_ranked.len();
    if post_caps.len() != n {
        return Err(EstimatorError::Length {
            expected: n,
            found: post_caps.len(),
        });
    }
    let mut sorted = post_caps.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![0.0; n];
    if sorted == post_caps {
        return Ok(out);
    }
    let (mut top_sorted, mut top_prev) = (0.0, 0.0);
    for k in 0..n.saturating_sub(1) {
        top_sorted += sorted[k];
        top_prev += post_caps[k];
        let w = prev_weights_ranked[k];
        if !(w > 0.0) {
            return Err(EstimatorError::ZeroWeight { rank: k });
        }
        // sorted partial sums dominate; clamp summation-order noise
        out[k] = (2.0 * (top_sorted - top_prev) / w).max(0.0);
    }
    Ok(out)
}

/// Local-time rates implied by stationarity of the ranked gaps:
/// `λ_k = −2·(ḡ_1 + ... + ḡ_k)`.
pub fn stationary_local_time(avg_drifts: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    avg_drifts
        .iter()
        .map(|g| {
            acc += g;
            -2.0 * acc
        })
        .collect()
}

/// Accumulated local times over a recording window.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTimeLedger {
    /// Accumulated crossover estimate of `Λ_{k,k+1}` per rank.
    pub crossover: Vec<f64>,
    /// Rates from averaged drifts.
    pub stationary: Vec<f64>,
    /// Recorded model time.
    pub elapsed: f64,
}

impl LocalTimeLedger {
    pub fn from_result(result: &SimulationResult) -> Self {
        Self {
            crossover: result.lt_crossover.clone(),
            stationary: stationary_local_time(&result.avg_drifts),
            elapsed: result.elapsed,
        }
    }

    pub fn crossover_rate(&self) -> Result<Vec<f64>, EstimatorError> {
        if !(self.elapsed > 0.0) {
            return Err(EstimatorError::NoElapsedTime);
        }
        Ok(self.crossover.iter().map(|l| l / self.elapsed).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedLocalTime {
    pub lambda: Vec<f64>,
    /// 0-based ranks where the crossover rate was not positive and the
    /// stationary value was substituted.
    pub fallback_ranks: Vec<usize>,
}

/// Crossover rate where positive, stationary rate elsewhere.
pub fn merge_local_time(
    crossover: &LocalTimeLedger,
    stationary: &[f64],
) -> Result<MergedLocalTime, EstimatorError> {
    let rate = crossover.crossover_rate()?;
    let mut fallback_ranks = Vec::new();
    let lambda = rate
        .iter()
        .zip(stationary)
        .enumerate()
        .map(|(k, (&c, &s))| {
            if c > 0.0 {
                c
            } else {
                fallback_ranks.push(k);
                s
            }
        })
        .collect();
    Ok(MergedLocalTime {
        lambda,
        fallback_ranks,
    })
}

/// Capital distribution when every gap `log(X_(k)/X_(k+1))` is exponential
/// with mean `(s²_k + s²_{k+1}) / (2λ_k)`. Returns `n` ranked weights.
pub fn first_order_weights(
    params: &ModelParams,
    lambda: &[f64],
) -> Result<Vec<f64>, EstimatorError> {
    let n = params.open_size;
    if lambda.len() < n.saturating_sub(1) {
        return Err(EstimatorError::Length {
            expected: n - 1,
            found: lambda.len(),
        });
    }
    let bad: Vec<usize> = (0..n.saturating_sub(1))
        .filter(|&k| !(lambda[k] > 0.0))
        .collect();
    if !bad.is_empty() {
        return Err(EstimatorError::NonPositiveLambda { ranks: bad });
    }
    let mut logw = vec![0.0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        let gap = (params.idio_var[k] + params.idio_var[k + 1]) / (2.0 * lambda[k]);
        logw[k] = logw[k + 1] + gap;
    }
    let max = logw[0];
    let w: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// One thinned point of the growth ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthSnapshot {
    pub time: f64,
    pub log_topn: f64,
    pub log_zmu: f64,
    pub log_universe: f64,
}

/// Cumulative log growth of the top-`n` capitalization and of the
/// open-market portfolio value, which leaks `½μ_(n)dΛ_{n,n+1}` per step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GrowthLedger {
    log_topn: CompensatedSum,
    log_zmu: CompensatedSum,
    log_universe: CompensatedSum,
    leakage: CompensatedSum,
    pub snapshots: Vec<GrowthSnapshot>,
}

impl GrowthLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ledger positioned at the given totals (used when merging replicas).
    pub fn at(log_topn: f64, log_zmu: f64, log_universe: f64, leakage: f64) -> Self {
        let mut ledger = Self::new();
        ledger.log_topn.add(log_topn);
        ledger.log_zmu.add(log_zmu);
        ledger.log_universe.add(log_universe);
        ledger.leakage.add(leakage);
        ledger
    }

    pub fn log_topn(&self) -> f64 {
        self.log_topn.value()
    }

    pub fn log_zmu(&self) -> f64 {
        self.log_zmu.value()
    }

    pub fn log_universe(&self) -> f64 {
        self.log_universe.value()
    }

    /// `½Σμ_(n)ΔΛ_{n,n+1}` accumulated independently of the two log series.
    pub fn leakage(&self) -> f64 {
        self.leakage.value()
    }

    pub fn add_universe(&mut self, dlog_universe: f64) {
        self.log_universe.add(dlog_universe);
    }

    pub fn snapshot(&mut self, time: f64) {
        self.snapshots.push(GrowthSnapshot {
            time,
            log_topn: self.log_topn(),
            log_zmu: self.log_zmu(),
            log_universe: self.log_universe(),
        });
    }
}

/// Advances the ledger by one step.
pub fn update_growth_ledger(
    ledger: &mut GrowthLedger,
    dlog_topn: f64,
    mu_n: f64,
    dlambda_n: f64,
) -> Result<(), EstimatorError> {
    if !(0.0..=1.0).contains(&mu_n) {
        return Err(EstimatorError::WeightOutOfRange(mu_n));
    }
    if !(dlambda_n >= 0.0) {
        return Err(EstimatorError::NegativeLocalTime(dlambda_n));
    }
    let leak = 0.5 * mu_n * dlambda_n;
    ledger.log_topn.add(dlog_topn);
    ledger.log_zmu.add(dlog_topn - leak);
    ledger.leakage.add(leak);
    Ok(())
}

/// Empirical checks of coherence, positive local-time rates and positive
/// gap variances.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `t⁻¹ log(X_i / X_1)` per stock at the end of the run.
    pub coherence_slopes: Vec<f64>,
    /// Largest `|t⁻¹ log(X_i/X_j)|` over all pairs.
    pub coherence_spread: f64,
    /// Crossover rates per boundary `k | k+1`, `k < N-1`.
    pub lambda_crossover: Vec<f64>,
    pub lambda_stationary: Vec<f64>,
    /// Merged rates.
    pub lambda: Vec<f64>,
    pub fallback_ranks: Vec<usize>,
    /// `s²_k + s²_{k+1}` from the parameters.
    pub sigma2_gap: Vec<f64>,
    /// Time-averaged `log(X_(k)/X_(k+1))`.
    pub avg_gap: Vec<f64>,
    /// Max over stocks of the L∞ distance between the empirical rank
    /// distribution and uniform.
    pub occupancy_uniformity: f64,
    /// Set when `n = N`: the boundary below the open market does not exist.
    pub closed_market: bool,
}

impl StabilityReport {
    pub fn all_lambda_positive(&self) -> bool {
        self.lambda.iter().all(|&l| l > 0.0)
    }
}

pub fn stability_report(
    result: &SimulationResult,
    params: &ModelParams,
) -> Result<StabilityReport, EstimatorError> {
    let stocks = params.stocks;
    let boundaries = stocks - 1;
    let ledger = LocalTimeLedger::from_result(result);
    let crossover = ledger.crossover_rate()?;
    let merged = merge_local_time(&ledger, &ledger.stationary)?;

    let slopes = result.coherence.clone();
    let fallback_ranks: Vec<usize> = merged
        .fallback_ranks
        .into_iter()
        .filter(|&k| k < boundaries)
        .collect();
    if !fallback_ranks.is_empty() {
        let shown: Vec<usize> = fallback_ranks.iter().map(|k| k + 1).collect();
        log::warn!("crossover local time not positive at boundaries {shown:?}; using stationary values");
    }

    let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);

    Ok(StabilityReport {
        coherence_spread: hi - lo,
        coherence_slopes: slopes,
        lambda_crossover: crossover[..boundaries].to_vec(),
        lambda_stationary: ledger.stationary[..boundaries].to_vec(),
        lambda: merged.lambda[..boundaries].to_vec(),
        fallback_ranks,
        sigma2_gap: (0..boundaries)
            .map(|k| params.idio_var[k] + params.idio_var[k + 1])
            .collect(),
        avg_gap: result.avg_log_gaps.clone(),
        occupancy_uniformity: result.occupancy.uniformity_distance(),
        closed_market: params.open_size == stocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn crossover_swap_example() {
        let inc = crossover_lt_increment(&[0.6, 0.4], &[0.38, 0.42]).unwrap();
        assert_relative_eq!(inc[0], 2.0 * 0.04 / 0.6, epsilon = 1e-15);
        assert_relative_eq!(inc[0], 0.133333333333, epsilon = 1e-11);
        assert_eq!(inc[1], 0.0);
    }

    #[test]
    fn crossover_no_change() {
        let inc = crossover_lt_increment(&[0.5, 0.3, 0.2], &[0.51, 0.29, 0.2]).unwrap();
        assert_eq!(inc, vec![0.0; 3]);
    }

    #[test]
    fn crossover_zero_weight() {
        assert_eq!(
            crossover_lt_increment(&[0.0, 0.4], &[0.38, 0.42]),
            Err(EstimatorError::ZeroWeight { rank: 0 })
        );
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn crossover_non_negative_over_all_permutations() {
        for n in 2..=5 {
            let values: Vec<f64> = (0..n).map(|k| 0.1 + 0.37 * (k as f64).powf(1.3)).collect();
            let weights = vec![1.0 / n as f64; n];
            for perm in permutations(n) {
                let post: Vec<f64> = perm.iter().map(|&i| values[i]).collect();
                let inc = crossover_lt_increment(&weights, &post).unwrap();
                assert!(inc.iter().all(|&x| x >= 0.0), "{perm:?} -> {inc:?}");
                assert_eq!(inc[n - 1], 0.0);
            }
        }
    }

    #[test]
    fn stationary_examples() {
        let lam = stationary_local_time(&[-0.0235, -0.0385, 0.062]);
        assert_relative_eq!(lam[0], 0.047, epsilon = 1e-15);
        assert_relative_eq!(lam[1], 0.124, epsilon = 1e-15);
        assert!(lam[2].abs() < 1e-15);
        assert_eq!(stationary_local_time(&[0.0; 4]), vec![0.0; 4]);
    }

    #[test]
    fn merge_substitutes_non_positive() {
        let ledger = LocalTimeLedger {
            crossover: vec![0.5, -0.01],
            stationary: vec![],
            elapsed: 10.0,
        };
        let m = merge_local_time(&ledger, &[0.048, 0.03]).unwrap();
        assert_relative_eq!(m.lambda[0], 0.05, epsilon = 1e-15);
        assert_eq!(m.lambda[1], 0.03);
        assert_eq!(m.fallback_ranks, vec![1]);

        let ok = LocalTimeLedger {
            crossover: vec![0.5, 0.2],
            stationary: vec![],
            elapsed: 1.0,
        };
        let m = merge_local_time(&ok, &[1.0, 1.0]).unwrap();
        assert_eq!(m.lambda, vec![0.5, 0.2]);
        assert!(m.fallback_ranks.is_empty());
    }

    #[test]
    fn merge_requires_elapsed_time() {
        let ledger = LocalTimeLedger {
            crossover: vec![0.5],
            stationary: vec![],
            elapsed: 0.0,
        };
        assert_eq!(
            merge_local_time(&ledger, &[0.1]),
            Err(EstimatorError::NoElapsedTime)
        );
    }

    #[test]
    fn first_order_three_ranks() {
        let p = ModelParams::uniform(4, 3, 0.06, 0.04, 0.051, 1e-3);
        let w = first_order_weights(&p, &[0.12, 0.06, 0.1]).unwrap();
        // logs (1.5, 1.0, 0): e^1.5, e^1, 1 normalized
        let raw = [1.5f64.exp(), 1f64.exp(), 1.0];
        let total: f64 = raw.iter().sum();
        for (a, r) in w.iter().zip(raw) {
            assert_relative_eq!(*a, r / total, epsilon = 1e-15);
        }
        assert_relative_eq!(w[0], 0.5466, epsilon = 1e-4);
        assert_relative_eq!(w[1], 0.3315, epsilon = 1e-4);
        assert_relative_eq!(w[2], 0.1220, epsilon = 1e-4);
    }

    #[test]
    fn first_order_infinite_lambda_is_uniform() {
        let p = ModelParams::uniform(6, 5, 0.06, 0.04, 0.051, 1e-3);
        let w = first_order_weights(&p, &[f64::INFINITY; 5]).unwrap();
        for x in w {
            assert_relative_eq!(x, 0.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn first_order_rejects_non_positive() {
        let p = ModelParams::uniform(6, 5, 0.06, 0.04, 0.051, 1e-3);
        assert_eq!(
            first_order_weights(&p, &[0.1, 0.0, 0.2, -1.0]),
            Err(EstimatorError::NonPositiveLambda { ranks: vec![1, 3] })
        );
    }

    #[test]
    fn ledger_step_example() {
        let mut l = GrowthLedger::new();
        update_growth_ledger(&mut l, 0.001, 0.0005, 0.02).unwrap();
        assert_relative_eq!(l.log_zmu(), 0.000995, epsilon = 1e-18);
        assert_eq!(l.log_topn(), 0.001);

        let mut l = GrowthLedger::new();
        update_growth_ledger(&mut l, 0.003, 0.2, 0.0).unwrap();
        assert_eq!(l.log_zmu(), l.log_topn());

        assert_eq!(
            update_growth_ledger(&mut l, 0.0, 0.1, -1e-3),
            Err(EstimatorError::NegativeLocalTime(-1e-3))
        );
        assert!(update_growth_ledger(&mut l, 0.0, 1.5, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn crossover_non_negative_random(
            post in prop::collection::vec(0.001f64..1.0, 2..12),
        ) {
            let n = post.len();
            let weights = vec![1.0 / n as f64; n];
            let inc = crossover_lt_increment(&weights, &post).unwrap();
            prop_assert!(inc.iter().all(|&x| x >= 0.0));
            prop_assert_eq!(inc[n - 1], 0.0);
        }

        #[test]
        fn first_order_scale_free(
            lambda in prop::collection::vec(0.01f64..2.0, 5),
            c in 0.1f64..10.0,
        ) {
            let p = ModelParams::uniform(7, 6, 0.06, 0.04, 0.051, 1e-3).with_variance_ramp(0.05, 0.08);
            let scaled: Vec<f64> = lambda.iter().map(|l| l * c).collect();
            let w = first_order_weights(&p, &scaled).unwrap();
            // recompute from gaps divided by c
            let mut logw = [0.0; 6];
            for k in (0..5).rev() {
                logw[k] = logw[k + 1] + (p.idio_var[k] + p.idio_var[k + 1]) / (2.0 * lambda[k]) / c;
            }
            let total: f64 = logw.iter().map(|l| l.exp()).sum();
            for (a, l) in w.iter().zip(logw) {
                prop_assert!((a - l.exp() / total).abs() < 1e-12);
            }
        }

        #[test]
        fn ledger_identity(
            steps in prop::collection::vec((-0.01f64..0.01, 0.0f64..0.05, 0.0f64..0.01), 1..500),
        ) {
            let mut l = GrowthLedger::new();
            let mut leak = 0.0;
            for (d, mu, lam) in steps {
                update_growth_ledger(&mut l, d, mu, lam).unwrap();
                leak += 0.5 * mu * lam;
            }
            prop_assert!((l.log_topn() - l.log_zmu() - l.leakage()).abs() < 1e-12);
            prop_assert!((l.leakage() - leak).abs() < 1e-12);
            prop_assert!(l.log_zmu() <= l.log_topn() + 1e-15);
        }

        #[test]
        fn merged_positive_when_stationary_positive(
            cross in prop::collection::vec(-1.0f64..1.0, 1..20),
        ) {
            let n = cross.len();
            let stationary = vec![0.3; n];
            let ledger = LocalTimeLedger { crossover: cross, stationary: vec![], elapsed: 2.0 };
            let m = merge_local_time(&ledger, &stationary).unwrap();
            prop_assert!(m.lambda.iter().all(|&l| l > 0.0));
        }
    }
}
