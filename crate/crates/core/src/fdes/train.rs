//! Full-batch projected gradient descent over weighted samples.

use crate::error::{Error, Result};
use crate::fdes::backprop::{backward, sgd_step, GradientSet};
use crate::fdes::{cost, FdesNetwork, FuzzyState};

/// Knobs for one training run. `seed` feeds network initialization in
/// [`train_seeded`]; the descent loop itself draws no randomness.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub rate: f64,
    pub seed: u64,
    pub train_sharpness: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            rate: 0.5,
            seed: 0,
            train_sharpness: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub network: FdesNetwork,
    /// Weighted mean cost at the start of each epoch, before that epoch's
    /// update; length equals epochs run.
    pub loss_history: Vec<f64>,
}

fn validate(
    net: &FdesNetwork,
    samples: &[(FuzzyState, FuzzyState, f64)],
    config: &TrainConfig,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Input("training sample set is empty".into()));
    }
    if config.epochs == 0 {
        return Err(Error::Parameter("epochs must be at least 1".into()));
    }
    if !(config.rate.is_finite() && config.rate > 0.0) {
        return Err(Error::Parameter(format!(
            "learning rate must be positive, got {}",
            config.rate
        )));
    }
    let n = net.dim();
    let mut total_weight = 0.0;
    for (idx, (q0, target, w)) in samples.iter().enumerate() {
        if q0.dim() != n || target.dim() != n {
            return Err(Error::Dimension {
                context: "train sample",
                expected: n,
                actual: if q0.dim() != n { q0.dim() } else { target.dim() },
            });
        }
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::Parameter(format!(
                "sample {idx} has invalid weight {w}"
            )));
        }
        total_weight += w;
    }
    if total_weight <= 0.0 {
        return Err(Error::Input("all sample weights are zero".into()));
    }
    Ok(total_weight)
}

/// Train `net` on `(q0, target, weight)` samples by full-batch projected
/// gradient descent: per epoch, the weighted mean gradient over all samples
/// is applied once, and entries are clamped back into `[0,1]`.
pub fn train(
    net: FdesNetwork,
    samples: &[(FuzzyState, FuzzyState, f64)],
    config: &TrainConfig,
) -> Result<TrainResult> {
    let total_weight = validate(&net, samples, config)?;
    let mut current = net;
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let mut batch = None::<GradientSet>;
        let mut loss = 0.0;
        for (q0, target, w) in samples {
            // Normalizing each weight up front (rather than dividing the
            // accumulated sum) keeps zero-weight samples exactly inert.
            let wn = w / total_weight;
            if wn == 0.0 {
                continue;
            }
            let trace = current.forward(q0)?;
            loss += wn * cost(trace.output(), target)?;
            let grads = backward(&current, &trace, target)?;
            match &mut batch {
                Some(acc) => acc.accumulate(&grads, wn)?,
                None => {
                    let mut acc = grads;
                    acc.scale(wn);
                    batch = Some(acc);
                }
            }
        }
        let batch = batch.expect("positive total weight guarantees a contribution");
        history.push(loss);
        current = sgd_step(&current, &batch, config.rate, config.train_sharpness)?;
    }
    Ok(TrainResult {
        network: current,
        loss_history: history,
    })
}

/// Convenience wrapper: initialize a random network from `config.seed` and
/// train it.
pub fn train_seeded(
    n: usize,
    depth: usize,
    sharpness: f64,
    samples: &[(FuzzyState, FuzzyState, f64)],
    config: &TrainConfig,
) -> Result<TrainResult> {
    let net = FdesNetwork::random(n, depth, sharpness, config.seed)?;
    train(net, samples, config)
}
