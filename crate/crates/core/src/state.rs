use crate::error::MarketError;

/// Log capitalizations of the universe at one instant, indexed by stock identity.
///
/// The engine keeps `Σ exp(logcap) = 1`; the removed log-total accumulates in
/// `growth_offset`, so the true log capitalization of stock `i` is
/// `logcap[i] + growth_offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniverseState {
    pub logcap: Vec<f64>,
    pub growth_offset: f64,
    pub time: f64,
}

impl UniverseState {
    pub fn new(logcap: Vec<f64>, growth_offset: f64, time: f64) -> Self {
        Self {
            logcap,
            growth_offset,
            time,
        }
    }

    /// Normalized state from raw (positive) capitalizations.
    pub fn from_caps(caps: &[f64]) -> Result<Self, MarketError> {
        let logcap: Vec<f64> = caps.iter().map(|c| c.ln()).collect();
        let mut state = Self::new(logcap, 0.0, 0.0);
        state.check_finite()?;
        state.normalize();
        Ok(state)
    }

    /// Capitalization proportional to `1 / rank`, stock `i` at rank `i`.
    pub fn zipf(stocks: usize) -> Self {
        let logcap = (1..=stocks).map(|k| -(k as f64).ln()).collect();
        let mut state = Self::new(logcap, 0.0, 0.0);
        state.normalize();
        state
    }

    pub fn len(&self) -> usize {
        self.logcap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logcap.is_empty()
    }

    pub fn check_finite(&self) -> Result<(), MarketError> {
        match self.logcap.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(MarketError::NonFinite { index }),
            None => Ok(()),
        }
    }

    /// Shifts log caps so they sum (in exp) to one and moves the shift into
    /// `growth_offset`. Returns the removed log-total.
    pub fn normalize(&mut self) -> f64 {
        let total = log_sum_exp(&self.logcap);
        for x in &mut self.logcap {
            *x -= total;
        }
        self.growth_offset += total;
        total
    }

    /// Universe weights `ζ_i`, computed without assuming normalization.
    pub fn universe_weights(&self) -> Vec<f64> {
        let total = log_sum_exp(&self.logcap);
        self.logcap.iter().map(|x| (x - total).exp()).collect()
    }

    /// True log capitalization of stock `i`.
    pub fn true_logcap(&self, i: usize) -> f64 {
        self.logcap[i] + self.growth_offset
    }
}

/// `log Σ exp(x_i)` with max-shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
