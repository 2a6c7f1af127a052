use thiserror::Error;

use crate::params::ValidationReport;

/// Domain violations in [`ModelParams`](crate::ModelParams).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("stock count N = {0} must exceed 2")]
    StockCount(usize),
    #[error("open-market size n = {n} must satisfy 1 <= n <= N = {stocks}")]
    OpenSize { n: usize, stocks: usize },
    #[error("expected {expected} idiosyncratic variance rates, found {found}")]
    VarianceLength { expected: usize, found: usize },
    #[error("idiosyncratic variance rate at rank {rank} must be positive, found {value}")]
    NonPositiveVariance { rank: usize, value: f64 },
    #[error("common variance rate must be >= 0, found {0}")]
    NegativeCommonVariance(f64),
    #[error("stability margin eps must be positive, found {0}")]
    NonPositiveEps(f64),
    #[error("time step dt must be positive, found {0}")]
    NonPositiveStep(f64),
    #[error("parameter {0} is not finite")]
    NonFinite(&'static str),
}

/// Errors from the pure market algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("non-finite log capitalization at stock {index}")]
    NonFinite { index: usize },
    #[error("open-market size n = {n} out of range for {stocks} stocks")]
    OpenSize { n: usize, stocks: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("covariance matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("linear system is singular")]
    Singular,
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Errors from the local-time and capital-distribution estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("previous ranked weight at rank {rank} is not positive")]
    ZeroWeight { rank: usize },
    #[error("local-time rate is not positive at ranks {ranks:?}")]
    NonPositiveLambda { ranks: Vec<usize> },
    #[error("recorded elapsed time is zero")]
    NoElapsedTime,
    #[error("local-time increment must be >= 0, found {0}")]
    NegativeLocalTime(f64),
    #[error("bottom open-market weight must lie in [0, 1], found {0}")]
    WeightOutOfRange(f64),
    #[error("expected {expected} entries, found {found}")]
    Length { expected: usize, found: usize },
}

/// Errors raised while running a simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("parameters violate the drift bound at ranks {:?}", .0.violating_ranks)]
    Invalid(ValidationReport),
    #[error("engine fault at step {step} (seed {seed}): {source}")]
    Fault {
        step: u64,
        seed: u64,
        #[source]
        source: MarketError,
    },
    #[error("schedule: {0}")]
    Schedule(&'static str),
    #[error("initial state has {found} stocks, parameters expect {expected}")]
    InitialState { expected: usize, found: usize },
}
