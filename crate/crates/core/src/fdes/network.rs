//! The layered event network and its forward pass.

use crate::error::{Error, Result};
use crate::fdes::{compose_smooth, EventMatrix, FuzzyState};
use crate::seeds::derive_seed;

/// A fuzzy discrete event network: `L` event matrices applied in order,
/// sharing one dimension `N` and one sharpness `delta`.
///
/// The forward pass evolves a start state through every layer with the
/// smooth composition; the hard max-product is reserved for ground-truth
/// generation and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FdesNetwork {
    layers: Vec<EventMatrix>,
    sharpness: f64,
}

/// All states visited by one forward pass: `states[0]` is the input,
/// `states[k]` the output of layer `k`, so the length is `L + 1`.
/// Backpropagation consumes the whole trace.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub states: Vec<FuzzyState>,
}

impl ForwardTrace {
    /// The network output `qL`.
    pub fn output(&self) -> &FuzzyState {
        self.states.last().expect("trace always holds q0")
    }
}

impl FdesNetwork {
    pub fn new(layers: Vec<EventMatrix>, sharpness: f64) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input("network needs at least one layer".into()));
        }
        let n = layers[0].dim();
        for (k, layer) in layers.iter().enumerate() {
            if layer.dim() != n {
                return Err(Error::Dimension {
                    context: "FdesNetwork::new",
                    expected: n,
                    actual: layer.dim(),
                });
            }
            let _ = k;
        }
        if !(sharpness.is_finite() && sharpness > 0.0) {
            return Err(Error::Parameter(format!(
                "sharpness must be a positive finite real, got {sharpness}"
            )));
        }
        Ok(FdesNetwork { layers, sharpness })
    }

    /// Random initialization: entries uniform in `[0.25, 0.75]`, one derived
    /// seed per layer. Keeps entries clear of the clamp bounds at the start
    /// of training.
    pub fn random(n: usize, depth: usize, sharpness: f64, seed: u64) -> Result<Self> {
        let layers = (0..depth)
            .map(|k| EventMatrix::random(n, 0.25, 0.75, derive_seed(seed, &format!("layer:{k}"))))
            .collect::<Result<Vec<_>>>()?;
        FdesNetwork::new(layers, sharpness)
    }

    pub fn dim(&self) -> usize {
        self.layers[0].dim()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    /// Replace the sharpness; used by training when `delta` is trainable.
    pub(crate) fn set_sharpness(&mut self, sharpness: f64) -> Result<()> {
        if !(sharpness.is_finite() && sharpness > 0.0) {
            return Err(Error::Parameter(format!(
                "sharpness must be a positive finite real, got {sharpness}"
            )));
        }
        self.sharpness = sharpness;
        Ok(())
    }

    pub fn layers(&self) -> &[EventMatrix] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [EventMatrix] {
        &mut self.layers
    }

    /// Run the smooth forward pass, keeping every intermediate state.
    pub fn forward(&self, q0: &FuzzyState) -> Result<ForwardTrace> {
        if q0.dim() != self.dim() {
            return Err(Error::Dimension {
                context: "FdesNetwork::forward",
                expected: self.dim(),
                actual: q0.dim(),
            });
        }
        let mut states = Vec::with_capacity(self.depth() + 1);
        states.push(q0.clone());
        for layer in &self.layers {
            let next = compose_smooth(states.last().unwrap(), layer, self.sharpness)?;
            states.push(next);
        }
        Ok(ForwardTrace { states })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdes::compose_smooth;

    #[test]
    fn single_layer_matches_compose_smooth() {
        let e = EventMatrix::random(3, 0.0, 1.0, 5).unwrap();
        let net = FdesNetwork::new(vec![e.clone()], 10.0).unwrap();
        let q0 = FuzzyState::new(vec![0.2, 0.9, 0.4]).unwrap();
        let trace = net.forward(&q0).unwrap();
        let direct = compose_smooth(&q0, &e, 10.0).unwrap();
        assert_eq!(trace.states.len(), 2);
        assert_eq!(trace.output().as_slice(), direct.as_slice());
    }

    #[test]
    fn identity_layers_at_high_sharpness_preserve_state() {
        let net = FdesNetwork::new(
            vec![EventMatrix::identity(2), EventMatrix::identity(2)],
            500.0,
        )
        .unwrap();
        let q0 = FuzzyState::new(vec![0.3, 0.7]).unwrap();
        let out = net.forward(&q0).unwrap();
        let tol = 2.0 * 2.0_f64.ln() / 500.0; // per-layer smoothing bias, twice
        assert!((out.output()[0] - 0.3).abs() <= tol);
        assert!((out.output()[1] - 0.7).abs() <= tol);
    }

    #[test]
    fn seeded_forward_is_finite_and_nonnegative() {
        let net = FdesNetwork::random(4, 3, 10.0, 42).unwrap();
        let q0 = FuzzyState::new(vec![0.1, 0.5, 0.9, 0.3]).unwrap();
        let trace = net.forward(&q0).unwrap();
        assert_eq!(trace.states.len(), 4);
        for s in &trace.states {
            for &x in s.as_slice() {
                assert!(x.is_finite() && x >= 0.0);
            }
        }
    }

    #[test]
    fn rejects_mixed_dimensions_and_bad_sharpness() {
        let bad = FdesNetwork::new(
            vec![EventMatrix::identity(2), EventMatrix::identity(3)],
            10.0,
        );
        assert!(bad.is_err());
        assert!(FdesNetwork::new(vec![EventMatrix::identity(2)], 0.0).is_err());
        assert!(FdesNetwork::new(vec![], 10.0).is_err());
    }

    #[test]
    fn forward_rejects_dim_mismatch() {
        let net = FdesNetwork::random(3, 1, 10.0, 1).unwrap();
        let q0 = FuzzyState::new(vec![0.5, 0.5]).unwrap();
        assert!(net.forward(&q0).is_err());
    }
}
