//! Fuzzy discrete event system learning with an event-driven stock
//! prediction pipeline.
//!
//! The model at the center of this crate is a fuzzy discrete event system
//! (FDES): system state is a fuzzy vector in `[0,1]^N`, events are `N x N`
//! matrices of transition degrees, and an event acts on a state by
//! max-product composition. Learning replaces the hard `max` with a
//! log-sum-exp softening so the composition becomes differentiable, and a
//! sequence-to-target cost is minimized by backpropagation through the
//! event layers.
//!
//! Around that core sit the pipeline stages:
//!
//! - [`market`]: price-series ingestion, min-max normalization, ROI
//!   extraction, rolling training windows.
//! - [`screen`]: correlation screening of ticker pairs with permutation
//!   tests.
//! - [`fdes`]: states, events, exact and smooth composition, the layered
//!   network, backpropagation, training, serialization.
//! - [`gan`]: an adversarial adjuster that nudges baseline forecasts using
//!   a logistic discriminator and the FDES generator.
//! - [`backtest`]: martingale and weighted-linear baselines, walk-forward
//!   evaluation, report emission.
//! - [`synth`]: synthetic market generators (geometric Brownian motion and
//!   FDES-driven series with known event matrices) used by the test
//!   harness.
//!
//! Everything is deterministic given a seed: randomness always flows
//! through [`seeds::rng_from_seed`] and child streams from
//! [`seeds::derive_seed`].

pub mod backtest;
pub mod error;
pub mod fdes;
pub mod gan;
pub mod market;
pub mod screen;
pub mod seeds;
pub mod synth;

pub use error::{Error, Result};
pub use fdes::{
    compose_exact, compose_smooth, cost, EventMatrix, FdesNetwork, FuzzyState, GradientSet,
    TrainConfig,
};
