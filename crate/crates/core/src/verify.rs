//! Oracle checks of the numeraire portfolio and the numeraire-market identity.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::engine::{step, GaussianShocks};
use crate::error::MarketError;
use crate::numeraire::{growth_rate, numeraire_residual, numeraire_weights, CovarianceModel, PortfolioWeights};
use crate::params::{DriftMode, ModelParams};
use crate::parallel::{map_indices, map_indices_sequential};
use crate::state::UniverseState;

/// Random dense markets checked against random perturbed portfolios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityConfig {
    pub markets: usize,
    pub perturbations: usize,
    /// Markets have between 1 and `max_dim` stocks.
    pub max_dim: usize,
    /// Perturbations satisfy `‖δ‖ ≤ radius`.
    pub radius: f64,
    pub seed: u64,
}

impl Default for OptimalityConfig {
    fn default() -> Self {
        Self {
            markets: 100,
            perturbations: 10_000,
            max_dim: 4,
            radius: 0.5,
            seed: 2018,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketCheck {
    pub dim: usize,
    /// `max_δ γ(ν + δ) − γ(ν)`; non-positive when ν is optimal.
    pub worst_excess: f64,
    /// `|γ(ν) − ½αᵀν|`.
    pub half_dot_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalitySummary {
    pub checks: Vec<MarketCheck>,
}

impl OptimalitySummary {
    pub fn worst_excess(&self) -> f64 {
        self.checks.iter().map(|c| c.worst_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn worst_half_dot_error(&self) -> f64 {
        self.checks.iter().map(|c| c.half_dot_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, growth_tol: f64, identity_tol: f64) -> bool {
        self.worst_excess() <= growth_tol && self.worst_half_dot_error() <= identity_tol
    }
}

/// Random `α ∈ [−0.1, 0.1]^m` and `Σ = AAᵀ + 0.02·I`, `A_ij ∈ [−0.3, 0.3]`.
pub fn random_market(rng: &mut ChaCha8Rng, max_dim: usize) -> (Vec<f64>, CovarianceModel) {
    let m = rng.random_range(1..=max_dim);
    let alpha = (0..m).map(|_| rng.random_range(-0.1..=0.1)).collect();
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-0.3..=0.3));
    let sigma = &a * a.transpose() + DMatrix::identity(m, m) * 0.02;
    // symmetrize exactly; the product can differ in the last ulp
    let sigma = (&sigma + sigma.transpose()) * 0.5;
    let cov = CovarianceModel::dense(sigma).expect("AAᵀ + 0.02I is positive definite");
    (alpha, cov)
}

fn check_market(cfg: &OptimalityConfig, index: usize) -> Result<MarketCheck, MarketError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let (alpha, cov) = random_market(&mut rng, cfg.max_dim);
    let m = alpha.len();
    let nu = numeraire_weights(&alpha, &cov)?;
    let g_nu = growth_rate(&nu, &alpha, &cov)?;
    let half_dot = 0.5 * nu.pi.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();

    let mut worst = f64::NEG_INFINITY;
    let mut dir = vec![0.0; m];
    for _ in 0..cfg.perturbations {
        for d in dir.iter_mut() {
            *d = rng.sample(StandardNormal);
        }
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let len = cfg.radius * rng.random::<f64>();
        let pi: Vec<f64> = nu.pi.iter().zip(&dir).map(|(n, d)| n + len * d / norm).collect();
        let g = growth_rate(&PortfolioWeights::new(pi), &alpha, &cov)?;
        worst = worst.max(g - g_nu);
    }
    Ok(MarketCheck {
        dim: m,
        worst_excess: worst,
        half_dot_error: (g_nu - half_dot).abs(),
    })
}

/// Growth optimality of the numeraire portfolio over random dense markets.
pub fn dense_optimality_suite(cfg: &OptimalityConfig) -> Result<OptimalitySummary, MarketError> {
    let checks = map_indices(cfg.markets, |i| check_market(cfg, i));
    Ok(OptimalitySummary {
        checks: checks.into_iter().collect::<Result<_, _>>()?,
    })
}

pub fn dense_optimality_suite_sequential(
    cfg: &OptimalityConfig,
) -> Result<OptimalitySummary, MarketError> {
    let checks = map_indices_sequential(cfg.markets, |i| check_market(cfg, i));
    Ok(OptimalitySummary {
        checks: checks.into_iter().collect::<Result<_, _>>()?,
    })
}

/// Largest `|α_i − σ_{iμ}|` over the Zipf start and `steps` Gaussian steps.
pub fn residual_identity(
    params: &ModelParams,
    steps: usize,
    seed: u64,
) -> Result<f64, MarketError> {
    let mut state = UniverseState::zipf(params.stocks);
    let mut shocks = GaussianShocks::new(seed, 0);
    let mut worst = numeraire_residual(&state, params, 1.0)?.max_abs;
    for _ in 0..steps {
        state = step(&state, params, DriftMode::B, &mut shocks)?.0;
        worst = worst.max(numeraire_residual(&state, params, 1.0)?.max_abs);
    }
    Ok(worst)
}

/// Largest difference between the closed-form structured solve and a dense
/// LU solve of the same matrix, relative to the solution size.
pub fn structured_vs_dense(params: &ModelParams, state: &UniverseState) -> Result<f64, MarketError> {
    let w = crate::market::weights(state, params.open_size)?;
    let structured = crate::numeraire::covariance_for_state(params, &w);
    let m = structured.dim();
    let dense = CovarianceModel::dense(DMatrix::from_fn(m, m, |i, j| structured.entry(i, j)))?;
    let alpha = crate::numeraire::rates_of_return(&w, params);
    let a = numeraire_weights(&alpha, &structured)?;
    let b = numeraire_weights(&alpha, &dense)?;
    let scale = b.pi.iter().map(|x| x.abs()).fold(1.0, f64::max);
    Ok(a.pi
        .iter()
        .zip(&b.pi)
        .map(|(x, y)| (x - y).abs() / scale)
        .fold(0.0, f64::max))
}
