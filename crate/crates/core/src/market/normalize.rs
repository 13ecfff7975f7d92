//! Min-max normalization into the fuzzy-state domain.

use crate::error::{Error, Result};
use crate::market::PriceSeries;

/// The affine map fitted by [`normalize`]; kept for inversion and reuse on
/// evaluation segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    min: f64,
    max: f64,
}

impl Scaler {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::Parameter(format!(
                "scaler needs min < max, got [{min}, {max}]"
            )));
        }
        Ok(Scaler { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn apply(&self, price: f64) -> f64 {
        (price - self.min) / (self.max - self.min)
    }

    /// Inverse map. Inputs outside `[0,1]` extrapolate linearly, so
    /// overshooting forecasts stay meaningful.
    pub fn invert(&self, value: f64) -> f64 {
        self.min + value * (self.max - self.min)
    }
}

/// A price series mapped into `[0,1]` by its own min-max range.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    ticker: String,
    values: Vec<f64>,
    scaler: Scaler,
}

impl NormalizedSeries {
    /// Wrap already-normalized values with the scaler that produced them.
    /// Values must lie in `[0,1]`.
    pub fn from_values(ticker: impl Into<String>, values: Vec<f64>, scaler: Scaler) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!(
                    "normalized value {v} at index {i} outside [0, 1]"
                )));
            }
        }
        Ok(NormalizedSeries {
            ticker: ticker.into(),
            values,
            scaler,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaler(&self) -> Scaler {
        self.scaler
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fit a min-max scaler on the series and map it into `[0,1]`.
pub fn normalize(series: &PriceSeries) -> Result<NormalizedSeries> {
    if series.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 prices to normalize, got {}",
            series.len()
        )));
    }
    let min = series.closes().iter().cloned().fold(f64::INFINITY, f64::min);
    let max = series
        .closes()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Err(Error::DegenerateRange { value: min });
    }
    let scaler = Scaler::new(min, max)?;
    let values = series.closes().iter().map(|&p| scaler.apply(p)).collect();
    NormalizedSeries::from_values(series.ticker(), values, scaler)
}

/// Map normalized values back to prices.
pub fn denormalize(values: &[f64], scaler: Scaler) -> Vec<f64> {
    values.iter().map(|&v| scaler.invert(v)).collect()
}
