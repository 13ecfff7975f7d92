//! Fuzzy state vectors.

use crate::error::{Error, Result};

/// A fuzzy state: a row vector of membership degrees in `[0,1]`.
///
/// Component `i` is the degree to which the system occupies crisp state `i`.
/// Unlike a probability vector the components need not sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyState(pub Vec<f64>);

impl FuzzyState {
    /// Build a state, validating every component is finite and in `[0,1]`.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Input("fuzzy state must be non-empty".into()));
        }
        for (i, &x) in components.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::Numerical(format!(
                    "state component {i} is not finite: {x}"
                )));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Parameter(format!(
                    "state component {i} is {x}, outside [0, 1]"
                )));
            }
        }
        Ok(FuzzyState(components))
    }

    /// Build a state without the `[0,1]` check.
    ///
    /// The smooth composition can overshoot 1 by up to `ln(N)/delta`, so
    /// network outputs are wrapped with this constructor. Components must
    /// still be finite for downstream math to make sense; the caller is
    /// trusted on that.
    pub fn from_raw(components: Vec<f64>) -> Self {
        FuzzyState(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for FuzzyState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
