//! Ranks, weights and rank-based drifts of the universe.

use crate::error::MarketError;
use crate::params::{DriftMode, ModelParams};
use crate::state::UniverseState;

/// Rank permutation and its inverse. Rank 0 is the largest stock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankView {
    /// `rank[i]`: rank held by stock `i`.
    pub rank: Vec<usize>,
    /// `stock[k]`: stock holding rank `k`.
    pub stock: Vec<usize>,
}

impl RankView {
    pub fn len(&self) -> usize {
        self.rank.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank.is_empty()
    }

    /// Reorders a stock-indexed vector into rank order.
    pub fn ranked(&self, by_stock: &[f64]) -> Vec<f64> {
        self.stock.iter().map(|&i| by_stock[i]).collect()
    }
}

/// Orders stocks by log capitalization, descending; equal values go to the
/// lower stock index first.
pub fn rank_view(logcap: &[f64]) -> Result<RankView, MarketError> {
    if let Some(index) = logcap.iter().position(|x| !x.is_finite()) {
        return Err(MarketError::NonFinite { index });
    }
    let mut stock: Vec<usize> = (0..logcap.len()).collect();
    // sort_by is stable, so ties keep ascending index order
    stock.sort_by(|&a, &b| logcap[b].total_cmp(&logcap[a]));
    let mut rank = vec![0; logcap.len()];
    for (k, &i) in stock.iter().enumerate() {
        rank[i] = k;
    }
    Ok(RankView { rank, stock })
}

/// Universe, open-market and extended weights at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    /// Universal weights `ζ_i`.
    pub zeta: Vec<f64>,
    /// Open-market weights `μ_i`, zero below rank `n`.
    pub mu: Vec<f64>,
    /// Extended weights `μ̃_i = ζ_i / Σ_{k<n} ζ_(k)`.
    pub mu_tilde: Vec<f64>,
    /// Top-`n` capitalization as a fraction of the universe.
    pub topn_cap: f64,
    pub open_size: usize,
    pub ranks: RankView,
}

impl WeightVector {
    pub fn mu_tilde_ranked(&self) -> Vec<f64> {
        self.ranks.ranked(&self.mu_tilde)
    }

    pub fn zeta_ranked(&self) -> Vec<f64> {
        self.ranks.ranked(&self.zeta)
    }

    /// Open-market weights in rank order, length `n`.
    pub fn mu_ranked(&self) -> Vec<f64> {
        self.ranks.stock[..self.open_size]
            .iter()
            .map(|&i| self.mu[i])
            .collect()
    }

    /// Weight of the smallest open-market stock, `μ_(n)`.
    pub fn mu_bottom(&self) -> f64 {
        self.mu[self.ranks.stock[self.open_size - 1]]
    }
}

/// Weights of `state` for an open market of size `open_size`.
pub fn weights(state: &UniverseState, open_size: usize) -> Result<WeightVector, MarketError> {
    let ranks = rank_view(&state.logcap)?;
    weights_with_ranks(state, ranks, open_size)
}

/// [`weights`] with an already computed rank view.
pub fn weights_with_ranks(
    state: &UniverseState,
    ranks: RankView,
    open_size: usize,
) -> Result<WeightVector, MarketError> {
    let stocks = state.len();
    if open_size == 0 || open_size > stocks {
        return Err(MarketError::OpenSize {
            n: open_size,
            stocks,
        });
    }
    if ranks.len() != stocks {
        return Err(MarketError::DimensionMismatch {
            expected: stocks,
            found: ranks.len(),
        });
    }
    let zeta = state.universe_weights();
    let topn_cap: f64 = ranks.stock[..open_size].iter().map(|&i| zeta[i]).sum();
    let mu_tilde: Vec<f64> = zeta.iter().map(|z| z / topn_cap).collect();
    let mu = mu_tilde
        .iter()
        .zip(&ranks.rank)
        .map(|(&m, &k)| if k < open_size { m } else { 0.0 })
        .collect();
    Ok(WeightVector {
        zeta,
        mu,
        mu_tilde,
        topn_cap,
        open_size,
        ranks,
    })
}

/// Per-rank drifts `g_k` and the reflection budget.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftVector {
    pub g: Vec<f64>,
    /// Mode B: `-Σ g_k`. Mode A: 0.
    pub budget: f64,
    pub mode: DriftMode,
}

impl DriftVector {
    /// Partial sums `g_1 + ... + g_k`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.g
            .iter()
            .scan(0.0, |acc, &g| {
                *acc += g;
                Some(*acc)
            })
            .collect()
    }
}

/// Numeraire drift `(μ̃_(k) − ½)s²_k − G + ½S²` at a single rank.
pub fn numeraire_drift(params: &ModelParams, rank: usize, mu_tilde: f64) -> f64 {
    (mu_tilde - 0.5) * params.idio_var[rank] - params.growth + 0.5 * params.common_var
}

/// Drifts that make the open market a numeraire market.
///
/// Mode B applies the numeraire rule at every rank and reports the missing
/// mass as `budget`; mode A replaces the bottom drift with the balancing value.
pub fn rank_drifts(w: &WeightVector, params: &ModelParams, mode: DriftMode) -> DriftVector {
    let stocks = w.ranks.len();
    let mut g: Vec<f64> = w
        .ranks
        .stock
        .iter()
        .enumerate()
        .map(|(k, &i)| numeraire_drift(params, k, w.mu_tilde[i]))
        .collect();
    let budget = match mode {
        DriftMode::A => {
            let upper: f64 = g[..stocks - 1].iter().sum();
            g[stocks - 1] = -upper;
            0.0
        }
        DriftMode::B => -g.iter().sum::<f64>(),
    };
    DriftVector { g, budget, mode }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn caps(c: &[f64]) -> UniverseState {
        UniverseState::from_caps(c).unwrap()
    }

    #[test]
    fn rank_of_three() {
        let rv = rank_view(&[5f64.ln(), 2f64.ln(), 3f64.ln()]).unwrap();
        assert_eq!(rv.rank, vec![0, 2, 1]);
        assert_eq!(rv.stock, vec![0, 2, 1]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let rv = rank_view(&[0.7, 0.7]).unwrap();
        assert_eq!(rv.rank, vec![0, 1]);
        let rv = rank_view(&[0.1, 0.7, 0.7, 0.7]).unwrap();
        assert_eq!(rv.stock, vec![1, 2, 3, 0]);
    }

    #[test]
    fn non_finite_rank_input() {
        assert_eq!(
            rank_view(&[0.0, f64::INFINITY]),
            Err(MarketError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn weights_five_three_two() {
        let w = weights(&caps(&[5.0, 3.0, 2.0]), 2).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
        assert!(close(&w.zeta, &[0.5, 0.3, 0.2]));
        assert!(close(&w.mu, &[0.625, 0.375, 0.0]));
        assert!(close(&w.mu_tilde, &[0.625, 0.375, 0.25]));
        assert!((w.topn_cap - 0.8).abs() < 1e-14);
        assert!((w.mu_bottom() - 0.375).abs() < 1e-14);
    }

    #[test]
    fn weights_closed_market() {
        let w = weights(&caps(&[5.0, 3.0, 2.0]), 3).unwrap();
        assert!((w.topn_cap - 1.0).abs() < 1e-15);
        for i in 0..3 {
            assert!((w.mu[i] - w.zeta[i]).abs() < 1e-15);
            assert!((w.mu_tilde[i] - w.zeta[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_with_ties() {
        let w = weights(&caps(&[1.0, 1.0, 1.0]), 2).unwrap();
        for (a, b) in w.mu.iter().zip([0.5, 0.5, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for m in &w.mu_tilde {
            assert!((m - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_reject_bad_open_size() {
        let s = caps(&[1.0, 2.0, 3.0]);
        assert!(matches!(weights(&s, 0), Err(MarketError::OpenSize { .. })));
        assert!(matches!(weights(&s, 4), Err(MarketError::OpenSize { .. })));
    }

    #[test]
    fn drift_reference_values() {
        let p = ModelParams::reference();
        assert!((numeraire_drift(&p, 0, 0.5) + 0.031).abs() < 1e-15);
        assert!((numeraire_drift(&p, 3, 0.01) + 0.0604).abs() < 1e-15);
    }

    #[test]
    fn drifts_three_stock_both_modes() {
        let p = ModelParams::uniform(3, 2, 0.06, 0.04, 0.051, 1.0);
        let w = weights(&caps(&[5.0, 3.0, 2.0]), 2).unwrap();

        let b = rank_drifts(&w, &p, DriftMode::B);
        for (g, e) in b.g.iter().zip([-0.0235, -0.0385, -0.046]) {
            assert!((g - e).abs() < 1e-15, "{g} vs {e}");
        }
        assert!((b.budget - 0.108).abs() < 1e-15);
        assert_eq!(b.g.iter().sum::<f64>() + b.budget, 0.0);

        let a = rank_drifts(&w, &p, DriftMode::A);
        for (g, e) in a.g.iter().zip([-0.0235, -0.0385, 0.062]) {
            assert!((g - e).abs() < 1e-15);
        }
        assert_eq!(a.budget, 0.0);
        assert_eq!(a.g.iter().sum::<f64>(), 0.0);
    }

    fn arb_logcaps() -> impl Strategy<Value = Vec<f64>> {
        (3usize..12).prop_flat_map(|n| prop::collection::vec(-6.0f64..0.0, n))
    }

    proptest! {
        #[test]
        fn rank_view_matches_stable_sort_oracle(x in prop::collection::vec(-3.0f64..3.0, 6)) {
            // independent oracle: selection by (value desc, index asc)
            let mut remaining: Vec<usize> = (0..x.len()).collect();
            let mut oracle = Vec::new();
            while !remaining.is_empty() {
                let mut best = 0;
                for j in 1..remaining.len() {
                    if x[remaining[j]] > x[remaining[best]] {
                        best = j;
                    }
                }
                oracle.push(remaining.remove(best));
            }
            let rv = rank_view(&x).unwrap();
            prop_assert_eq!(&rv.stock, &oracle);
            for i in 0..x.len() {
                prop_assert_eq!(rv.stock[rv.rank[i]], i);
            }
        }

        #[test]
        fn weight_invariants(logcap in arb_logcaps(), frac in 0.0f64..1.0) {
            let stocks = logcap.len();
            let n = 1 + ((stocks - 1) as f64 * frac) as usize;
            let mut s = UniverseState::new(logcap, 0.0, 0.0);
            s.normalize();
            let w = weights(&s, n).unwrap();
            prop_assert!((w.zeta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!((w.mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for i in 0..stocks {
                prop_assert!(w.mu_tilde[i] > 0.0 && w.mu_tilde[i] <= 1.0 + 1e-15);
                if w.ranks.rank[i] < n {
                    prop_assert_eq!(w.mu[i], w.mu_tilde[i]);
                } else {
                    prop_assert_eq!(w.mu[i], 0.0);
                }
            }
            let ranked = w.mu_tilde_ranked();
            prop_assert!(ranked[..n].windows(2).all(|p| p[0] >= p[1]));
        }

        #[test]
        fn mode_a_partial_sums(logcap in arb_logcaps()) {
            let stocks = logcap.len();
            let p = ModelParams::uniform(stocks, stocks - 1, 0.06, 0.04, 0.051, 1e-3);
            let mut s = UniverseState::new(logcap, 0.0, 0.0);
            s.normalize();
            let w = weights(&s, p.open_size).unwrap();
            let d = rank_drifts(&w, &p, DriftMode::A);
            prop_assert_eq!(d.g.iter().sum::<f64>(), 0.0);
            let partial = d.partial_sums();
            for (k, s) in partial[..stocks - 1].iter().enumerate() {
                prop_assert!(*s < -p.eps * (k as f64 + 1.0) + 1e-12);
                prop_assert!(*s < -p.eps + 1e-12);
            }
        }
    }
}
