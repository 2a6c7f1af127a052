//! Model constants for the rank-based universe and the drift-bound check.

use crate::error::ParamError;

/// Slack allowed when comparing the drift bound against `-eps`.
///
/// The reference parameters sit exactly on the bound (`0.03 - 0.051 + 0.02 = -0.001`),
/// which floating point evaluates a few ulps above `-0.001`.
pub const BOUND_TOLERANCE: f64 = 1e-12;

/// How the balancing drift at the bottom of the universe is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DriftMode {
    /// Ranks `1..N-1` follow the numeraire drift rule; rank `N` receives the
    /// balancing drift `-(g_1 + ... + g_{N-1})`. No reflection.
    A,
    /// Every rank follows the numeraire drift rule and the missing mass is
    /// restored by reflecting the lowest stocks each step.
    #[default]
    B,
}

impl DriftMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DriftMode::A => "A",
            DriftMode::B => "B",
        }
    }
}

impl std::str::FromStr for DriftMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(DriftMode::A),
            "B" | "b" => Ok(DriftMode::B),
            other => Err(format!("unknown drift mode '{other}', expected A or B")),
        }
    }
}

/// Constants of the equity universe.
///
/// Ranks are 0-based throughout the crate: `idio_var[0]` is the variance rate
/// of the largest stock.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Universe size `N`.
    pub stocks: usize,
    /// Open-market size `n`.
    pub open_size: usize,
    /// Idiosyncratic variance rate per rank, `s²_k`.
    pub idio_var: Vec<f64>,
    /// Common-factor variance rate `S²`.
    pub common_var: f64,
    /// Common growth rate `G`.
    pub growth: f64,
    /// Stability margin.
    pub eps: f64,
    /// Time step.
    pub dt: f64,
}

impl ModelParams {
    /// Constant idiosyncratic variance across ranks.
    pub fn uniform(
        stocks: usize,
        open_size: usize,
        idio_var: f64,
        common_var: f64,
        growth: f64,
        dt: f64,
    ) -> Self {
        Self {
            stocks,
            open_size,
            idio_var: vec![idio_var; stocks],
            common_var,
            growth,
            eps: 0.001,
            dt,
        }
    }

    /// `N = 550`, `n = 500`, `s² = 0.06`, `S² = 0.04`, `G = 0.051`, `dt = 1e-4`.
    pub fn reference() -> Self {
        Self::uniform(550, 500, 0.06, 0.04, 0.051, 1e-4)
    }

    /// Reference rates on a ten-times smaller universe with `dt = 1e-3`.
    pub fn desk() -> Self {
        Self::uniform(55, 50, 0.06, 0.04, 0.051, 1e-3)
    }

    /// Linear ramp of idiosyncratic variance from rank 1 to rank N.
    pub fn with_variance_ramp(mut self, first: f64, last: f64) -> Self {
        let n = self.stocks;
        self.idio_var = (0..n)
            .map(|k| {
                if n == 1 {
                    first
                } else {
                    first + (last - first) * k as f64 / (n - 1) as f64
                }
            })
            .collect();
        self
    }

    /// Checks the domain constraints (positivity, sizes, finiteness).
    pub fn check_domain(&self) -> Result<(), ParamError> {
        if self.stocks <= 2 {
            return Err(ParamError::StockCount(self.stocks));
        }
        if self.open_size == 0 || self.open_size > self.stocks {
            return Err(ParamError::OpenSize {
                n: self.open_size,
                stocks: self.stocks,
            });
        }
        if self.idio_var.len() != self.stocks {
            return Err(ParamError::VarianceLength {
                expected: self.stocks,
                found: self.idio_var.len(),
            });
        }
        for (rank, &v) in self.idio_var.iter().enumerate() {
            if !v.is_finite() {
                return Err(ParamError::NonFinite("s2"));
            }
            if v <= 0.0 {
                return Err(ParamError::NonPositiveVariance { rank, value: v });
            }
        }
        for (name, v) in [
            ("S2", self.common_var),
            ("G", self.growth),
            ("eps", self.eps),
            ("dt", self.dt),
        ] {
            if !v.is_finite() {
                return Err(ParamError::NonFinite(name));
            }
        }
        if self.common_var < 0.0 {
            return Err(ParamError::NegativeCommonVariance(self.common_var));
        }
        if self.eps <= 0.0 {
            return Err(ParamError::NonPositiveEps(self.eps));
        }
        if self.dt <= 0.0 {
            return Err(ParamError::NonPositiveStep(self.dt));
        }
        Ok(())
    }

    /// Supremum over attainable extended weights of the drift at `rank`,
    /// reached at `μ̃ = 1`: `½s²_k − G + ½S²`.
    pub fn drift_sup(&self, rank: usize) -> f64 {
        0.5 * self.idio_var[rank] - self.growth + 0.5 * self.common_var
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Outcome of [`validate_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub valid: bool,
    /// `½s²_k − G + ½S²` for ranks `0..N-1` (the last rank is excluded).
    pub bounds: Vec<f64>,
    /// 0-based ranks whose bound exceeds `-eps`.
    pub violating_ranks: Vec<usize>,
}

/// Checks that every rank above the bottom has a drift bounded by `-eps`
/// for every attainable extended weight, which makes every partial drift sum
/// negative and the numeraire construction admissible.
pub fn validate_params(params: &ModelParams) -> Result<ValidationReport, ParamError> {
    params.check_domain()?;
    let bounds: Vec<f64> = (0..params.stocks - 1).map(|k| params.drift_sup(k)).collect();
    let violating_ranks: Vec<usize> = bounds
        .iter()
        .enumerate()
        .filter(|(_, &b)| b > -params.eps + BOUND_TOLERANCE)
        .map(|(k, _)| k)
        .collect();
    Ok(ValidationReport {
        valid: violating_ranks.is_empty(),
        bounds,
        violating_ranks,
    })
}
