//! Covariance structure, the growth-optimal (numeraire) portfolio and the
//! numeraire-market residual.
//!
//! The growth rate of a portfolio `π` is `πᵀα − ½πᵀΣπ`; it is maximized by the
//! solution of `Σν = α`. For the universe the covariance is diagonal plus a
//! common rank-one term, so the solve is done in closed form; arbitrary small
//! dense matrices go through an LU factorization with partial pivoting.

use nalgebra::{DMatrix, DVector};

use crate::error::MarketError;
use crate::market::{numeraire_drift, weights, WeightVector};
use crate::params::ModelParams;
use crate::state::UniverseState;

/// Relative residual accepted from the dense solver.
const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceModel {
    /// `σ_ii = s²_i + S²`, `σ_ij = S²` for `i ≠ j`.
    Structured { idio_var: Vec<f64>, common_var: f64 },
    /// Symmetric positive-definite matrix.
    Dense(DMatrix<f64>),
}

impl CovarianceModel {
    pub fn structured(idio_var: Vec<f64>, common_var: f64) -> Self {
        CovarianceModel::Structured {
            idio_var,
            common_var,
        }
    }

    /// Validates symmetry, positive diagonal and positive definiteness (via Cholesky).
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self, MarketError> {
        let m = matrix.nrows();
        if matrix.ncols() != m {
            return Err(MarketError::DimensionMismatch {
                expected: m,
                found: matrix.ncols(),
            });
        }
        for i in 0..m {
            if !(matrix[(i, i)] > 0.0) {
                return Err(MarketError::NotPositiveDefinite);
            }
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-14 * (a.abs() + b.abs()).max(1.0) {
                    return Err(MarketError::NotSymmetric { row: i, col: j });
                }
            }
        }
        if matrix.clone().cholesky().is_none() {
            return Err(MarketError::NotPositiveDefinite);
        }
        Ok(CovarianceModel::Dense(matrix))
    }

    pub fn dim(&self) -> usize {
        match self {
            CovarianceModel::Structured { idio_var, .. } => idio_var.len(),
            CovarianceModel::Dense(m) => m.nrows(),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            CovarianceModel::Structured {
                idio_var,
                common_var,
            } => {
                if i == j {
                    idio_var[i] + common_var
                } else {
                    *common_var
                }
            }
            CovarianceModel::Dense(m) => m[(i, j)],
        }
    }

    /// `Σv`.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>, MarketError> {
        self.check_dim(v.len())?;
        Ok(match self {
            CovarianceModel::Structured {
                idio_var,
                common_var,
            } => {
                let common = common_var * v.iter().sum::<f64>();
                idio_var.iter().zip(v).map(|(s, x)| s * x + common).collect()
            }
            CovarianceModel::Dense(m) => {
                let out = m * DVector::from_column_slice(v);
                out.iter().copied().collect()
            }
        })
    }

    /// `vᵀΣv`.
    pub fn quad_form(&self, v: &[f64]) -> Result<f64, MarketError> {
        let sv = self.mul_vec(v)?;
        Ok(v.iter().zip(&sv).map(|(a, b)| a * b).sum())
    }

    /// Solves `Σx = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, MarketError> {
        self.check_dim(rhs.len())?;
        match self {
            CovarianceModel::Structured {
                idio_var,
                common_var,
            } => solve_diag_plus_rank_one(idio_var, *common_var, rhs),
            CovarianceModel::Dense(m) => {
                let lu = m.clone().lu();
                let x = lu
                    .solve(&DVector::from_column_slice(rhs))
                    .ok_or(MarketError::Singular)?;
                let x: Vec<f64> = x.iter().copied().collect();
                let residual = self.mul_vec(&x)?;
                let err = residual
                    .iter()
                    .zip(rhs)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let scale = rhs.iter().map(|b| b.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                if !(err / scale <= SOLVE_TOLERANCE) {
                    return Err(MarketError::Singular);
                }
                Ok(x)
            }
        }
    }

    fn check_dim(&self, found: usize) -> Result<(), MarketError> {
        let expected = self.dim();
        if expected != found {
            return Err(MarketError::DimensionMismatch { expected, found });
        }
        Ok(())
    }
}

/// `(D + c·11ᵀ)x = b` via Sherman–Morrison:
/// `x = D⁻¹b − D⁻¹1 · c(1ᵀD⁻¹b) / (1 + c·1ᵀD⁻¹1)`.
fn solve_diag_plus_rank_one(
    diag: &[f64],
    common: f64,
    rhs: &[f64],
) -> Result<Vec<f64>, MarketError> {
    if diag.iter().any(|&d| !(d > 0.0)) || common < 0.0 {
        return Err(MarketError::NotPositiveDefinite);
    }
    let dinv_b: Vec<f64> = rhs.iter().zip(diag).map(|(b, d)| b / d).collect();
    let sum_dinv_b: f64 = dinv_b.iter().sum();
    let sum_dinv: f64 = diag.iter().map(|d| d.recip()).sum();
    let shift = common * sum_dinv_b / (1.0 + common * sum_dinv);
    Ok(dinv_b
        .iter()
        .zip(diag)
        .map(|(x, d)| x - shift / d)
        .collect())
}

/// Covariance of the universe in rank order.
///
/// With constant `s²` this is also the covariance in stock order; otherwise
/// use [`covariance_for_state`].
pub fn covariance_model(params: &ModelParams) -> CovarianceModel {
    CovarianceModel::structured(params.idio_var.clone(), params.common_var)
}

/// Covariance in stock order, reading each stock's `s²` from its current rank.
pub fn covariance_for_state(params: &ModelParams, w: &WeightVector) -> CovarianceModel {
    let idio_var = w
        .ranks
        .rank
        .iter()
        .map(|&k| params.idio_var[k])
        .collect();
    CovarianceModel::structured(idio_var, params.common_var)
}

/// Stock weights with the implicit cash position `1 − Σπ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights {
    pub pi: Vec<f64>,
    pub cash: f64,
}

impl PortfolioWeights {
    pub fn new(pi: Vec<f64>) -> Self {
        let cash = 1.0 - pi.iter().sum::<f64>();
        Self { pi, cash }
    }
}

/// Growth-optimal portfolio: the solution of `Σν = α`.
pub fn numeraire_weights(
    alpha: &[f64],
    cov: &CovarianceModel,
) -> Result<PortfolioWeights, MarketError> {
    Ok(PortfolioWeights::new(cov.solve(alpha)?))
}

/// Portfolio growth rate `πᵀα − ½πᵀΣπ`.
pub fn growth_rate(
    pi: &PortfolioWeights,
    alpha: &[f64],
    cov: &CovarianceModel,
) -> Result<f64, MarketError> {
    if alpha.len() != pi.pi.len() {
        return Err(MarketError::DimensionMismatch {
            expected: pi.pi.len(),
            found: alpha.len(),
        });
    }
    let ret: f64 = pi.pi.iter().zip(alpha).map(|(a, b)| a * b).sum();
    Ok(ret - 0.5 * cov.quad_form(&pi.pi)?)
}

/// `α_i − ρ·σ_{iμ}` for every open-market stock.
#[derive(Debug, Clone, PartialEq)]
pub struct NumeraireResidual {
    /// `(stock, residual)` in rank order, ranks `0..n`.
    pub entries: Vec<(usize, f64)>,
    pub max_abs: f64,
}

/// Rate of return of every stock under numeraire drifts:
/// `α_i = g_{r(i)} + G + ½(s²_{r(i)} + S²)`.
pub fn rates_of_return(w: &WeightVector, params: &ModelParams) -> Vec<f64> {
    w.ranks
        .rank
        .iter()
        .zip(&w.mu_tilde)
        .map(|(&k, &mt)| {
            let g = numeraire_drift(params, k, mt);
            (g + params.growth) + 0.5 * (params.idio_var[k] + params.common_var)
        })
        .collect()
}

/// Residual of the numeraire-market condition (`ρ = 1`) or of
/// CAPM-consistency for general `ρ`.
pub fn numeraire_residual(
    state: &UniverseState,
    params: &ModelParams,
    rho: f64,
) -> Result<NumeraireResidual, MarketError> {
    let w = weights(state, params.open_size)?;
    numeraire_residual_for(&w, params, rho)
}

/// [`numeraire_residual`] on precomputed weights.
pub fn numeraire_residual_for(
    w: &WeightVector,
    params: &ModelParams,
    rho: f64,
) -> Result<NumeraireResidual, MarketError> {
    let alpha = rates_of_return(w, params);
    let cov_mu = covariance_for_state(params, w).mul_vec(&w.mu)?;
    let entries: Vec<(usize, f64)> = w.ranks.stock[..w.open_size]
        .iter()
        .map(|&i| (i, alpha[i] - rho * cov_mu[i]))
        .collect();
    let max_abs = entries.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    Ok(NumeraireResidual { entries, max_abs })
}
