//! Simulation and verification of open numeraire markets.
//!
//! The universe is a rank-based diffusion of `N` stocks; its top `n` ranks form
//! an open market whose market portfolio is also the growth-optimal portfolio.
//!
//! * [`market`] and [`numeraire`]: ranks, weights, drifts, covariance, the
//!   numeraire solve and the numeraire-market residual.
//! * [`engine`]: seeded path generation with bottom reflection.
//! * [`analytics`]: local-time estimators, the first-order capital
//!   distribution, growth ledgers and the stability report.
//! * [`parallel`] and [`verify`]: batch runs and oracle suites.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod engine;
pub mod error;
pub mod market;
pub mod numeraire;
pub mod parallel;
pub mod params;
pub mod state;
pub mod sum;
pub mod verify;

pub use analytics::{
    crossover_lt_increment, first_order_weights, merge_local_time, stability_report,
    stationary_local_time, update_growth_ledger, GrowthLedger, GrowthSnapshot, LocalTimeLedger,
    MergedLocalTime, StabilityReport,
};
pub use engine::{
    merge_results, reflection_rebalance, simulate, step, step_with_drifts, GaussianShocks,
    Occupancy, ShockSource, SimulationResult, SimulationSchedule, Simulator, StepDiagnostics,
    ZeroShocks, GENERATOR_NAME,
};
pub use error::{EstimatorError, MarketError, ParamError, SimError};
pub use market::{rank_drifts, rank_view, weights, DriftVector, RankView, WeightVector};
pub use numeraire::{
    covariance_model, growth_rate, numeraire_residual, numeraire_weights, CovarianceModel,
    NumeraireResidual, PortfolioWeights,
};
pub use parallel::{simulate_replicas, simulate_replicas_sequential};
pub use params::{validate_params, DriftMode, ModelParams, ValidationReport};
pub use state::UniverseState;
