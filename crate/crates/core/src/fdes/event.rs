//! Fuzzy event matrices.

use crate::error::{Error, Result};
use crate::seeds::rng_from_seed;
use rand::Rng;

/// A fuzzy event: an `N x N` matrix of transition degrees in `[0,1]`.
///
/// Entry `(i, j)` is the degree to which the event moves the system from
/// crisp state `i` to crisp state `j`. Stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EventMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl EventMatrix {
    /// Build an event matrix from row-major entries, validating shape and
    /// that every entry is finite and in `[0,1]`.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("event matrix must be non-empty".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension {
                context: "EventMatrix::new",
                expected: n * n,
                actual: entries.len(),
            });
        }
        for (k, &x) in entries.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::Numerical(format!(
                    "event entry ({}, {}) is not finite: {x}",
                    k / n,
                    k % n
                )));
            }
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Parameter(format!(
                    "event entry ({}, {}) is {x}, outside [0, 1]",
                    k / n,
                    k % n
                )));
            }
        }
        Ok(EventMatrix { n, entries })
    }

    /// The zero event of size `n` (annihilates every state).
    pub fn zeros(n: usize) -> Self {
        EventMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    /// The identity event of size `n` (max-product identity: leaves any
    /// state unchanged under exact composition).
    pub fn identity(n: usize) -> Self {
        let mut e = Self::zeros(n);
        for i in 0..n {
            e.entries[i * n + i] = 1.0;
        }
        e
    }

    /// A random event with entries drawn uniformly from `[lo, hi]`,
    /// clamped to `[0,1]`.
    pub fn random(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::Parameter(format!(
                "bad random range [{lo}, {hi}]"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let entries = (0..n * n)
            .map(|_| rng.random_range(lo..=hi).clamp(0.0, 1.0))
            .collect();
        EventMatrix::new(n, entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Set entry `(i, j)` without range validation. Training clamps
    /// separately; tests use this to poke raw values.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    /// Clamp every entry into `[0,1]`. Used as the projection step of
    /// projected gradient descent.
    pub fn clamp_entries(&mut self) {
        for x in &mut self.entries {
            *x = x.clamp(0.0, 1.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_is_enforced() {
        assert!(EventMatrix::new(2, vec![0.1; 3]).is_err());
        assert!(EventMatrix::new(2, vec![0.1; 4]).is_ok());
    }

    #[test]
    fn range_is_enforced() {
        assert!(EventMatrix::new(1, vec![1.5]).is_err());
        assert!(EventMatrix::new(1, vec![-0.2]).is_err());
        assert!(EventMatrix::new(1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn identity_has_unit_diagonal() {
        let e = EventMatrix::identity(3);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(e.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn random_respects_bounds_and_seed() {
        let a = EventMatrix::random(4, 0.25, 0.75, 9).unwrap();
        let b = EventMatrix::random(4, 0.25, 0.75, 9).unwrap();
        assert_eq!(a, b);
        for &x in a.as_slice() {
            assert!((0.25..=0.75).contains(&x));
        }
    }
}
