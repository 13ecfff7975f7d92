//! Backpropagation through the smooth composition, plus the
//! finite-difference oracle used to police it.
//!
//! With products `p_{i,j} = S^n_i a_{i,j}` and softmax weights
//! `w_{i,j} = exp(delta p_{i,j}) / sum_m exp(delta p_{m,j})`, differentiating
//! the log-sum-exp forward map gives
//!
//! ```text
//! dS^{n+1}_j / da_{i,j}  = w_{i,j} S^n_i
//! dS^{n+1}_j / dS^n_i    = w_{i,j} a_{i,j}
//! dS^{n+1}_j / d delta   = (sum_m w_{m,j} p_{m,j}  -  S^{n+1}_j) / delta
//! ```
//!
//! and the error signal recursion `e^n_i = sum_j e^{n+1}_j w_{i,j} a_{i,j}`
//! starting from `e^L = qL - target`. The weights are recomputed here from
//! the stored trace with the same shifted-exponent arithmetic as the forward
//! pass, so the two sides agree to machine precision.

use crate::error::{Error, Result};
use crate::fdes::network::ForwardTrace;
use crate::fdes::{cost, FdesNetwork, FuzzyState};

/// Per-layer gradient matrices plus the sharpness gradient, shaped exactly
/// like the network they came from.
#[derive(Debug, Clone)]
pub struct GradientSet {
    n: usize,
    layer_grads: Vec<Vec<f64>>,
    sharpness_grad: f64,
}

impl GradientSet {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.layer_grads.len()
    }

    /// Row-major `N x N` gradient block for layer `k`.
    pub fn layer(&self, k: usize) -> &[f64] {
        &self.layer_grads[k]
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.layer_grads[k][i * self.n + j]
    }

    pub fn sharpness_grad(&self) -> f64 {
        self.sharpness_grad
    }

    /// Largest entry magnitude, sharpness gradient included.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.sharpness_grad.abs();
        for layer in &self.layer_grads {
            for &g in layer {
                m = m.max(g.abs());
            }
        }
        m
    }

    fn zeros(n: usize, depth: usize) -> Self {
        GradientSet {
            n,
            layer_grads: vec![vec![0.0; n * n]; depth],
            sharpness_grad: 0.0,
        }
    }

    /// Weighted accumulation: `self += w * other`. Used by full-batch
    /// training to average per-sample gradients.
    pub fn accumulate(&mut self, other: &GradientSet, w: f64) -> Result<()> {
        if self.n != other.n || self.depth() != other.depth() {
            return Err(Error::Dimension {
                context: "GradientSet::accumulate",
                expected: self.n,
                actual: other.n,
            });
        }
        for (mine, theirs) in self.layer_grads.iter_mut().zip(&other.layer_grads) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += w * b;
            }
        }
        self.sharpness_grad += w * other.sharpness_grad;
        Ok(())
    }

    pub fn scale(&mut self, s: f64) {
        for layer in &mut self.layer_grads {
            for g in layer.iter_mut() {
                *g *= s;
            }
        }
        self.sharpness_grad *= s;
    }

    fn check_finite(&self) -> Result<()> {
        if !self.sharpness_grad.is_finite() {
            return Err(Error::Numerical(
                "sharpness gradient is not finite".into(),
            ));
        }
        for (k, layer) in self.layer_grads.iter().enumerate() {
            for (idx, &g) in layer.iter().enumerate() {
                if !g.is_finite() {
                    return Err(Error::Numerical(format!(
                        "gradient entry ({}, {}, {}) is not finite: {g}",
                        k,
                        idx / self.n,
                        idx % self.n
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_trace(net: &FdesNetwork, trace: &ForwardTrace) -> Result<()> {
    if trace.states.len() != net.depth() + 1 {
        return Err(Error::Dimension {
            context: "backward trace depth",
            expected: net.depth() + 1,
            actual: trace.states.len(),
        });
    }
    for s in &trace.states {
        if s.dim() != net.dim() {
            return Err(Error::Dimension {
                context: "backward trace state",
                expected: net.dim(),
                actual: s.dim(),
            });
        }
    }
    Ok(())
}

/// Backpropagate an arbitrary gradient of some scalar loss with respect to
/// the network output `qL` down to every event-matrix entry and to the
/// sharpness.
///
/// This is the shared engine: the squared-error path seeds it with
/// `qL - target`, the adversarial generator path seeds it with the
/// discriminator's chain-rule factor.
pub fn backward_from_output_grad(
    net: &FdesNetwork,
    trace: &ForwardTrace,
    output_grad: &[f64],
) -> Result<GradientSet> {
    check_trace(net, trace)?;
    let n = net.dim();
    if output_grad.len() != n {
        return Err(Error::Dimension {
            context: "backward output grad",
            expected: n,
            actual: output_grad.len(),
        });
    }
    let depth = net.depth();
    let delta = net.sharpness();
    let mut grads = GradientSet::zeros(n, depth);
    let mut err = output_grad.to_vec();
    let mut next_err = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in (0..depth).rev() {
        let input = &trace.states[k];
        let output = &trace.states[k + 1];
        let layer = &net.layers()[k];
        next_err.iter_mut().for_each(|e| *e = 0.0);
        let g = &mut grads.layer_grads[k];

        for j in 0..n {
            let ej = err[j];
            // Recompute column j's softmax weights with the forward pass's
            // own shift, so ratios match it bit for bit.
            let mut p_max = f64::NEG_INFINITY;
            for i in 0..n {
                let p = input[i] * layer.get(i, j);
                if p > p_max {
                    p_max = p;
                }
            }
            let mut sum = 0.0;
            for i in 0..n {
                let p = input[i] * layer.get(i, j);
                w[i] = (delta * (p - p_max)).exp();
                sum += w[i];
            }
            let inv = 1.0 / sum;
            let mut weighted_p = 0.0;
            for i in 0..n {
                let wij = w[i] * inv;
                let p = input[i] * layer.get(i, j);
                g[i * n + j] = ej * wij * input[i];
                next_err[i] += ej * wij * layer.get(i, j);
                weighted_p += wij * p;
            }
            grads.sharpness_grad += ej * (weighted_p - output[j]) / delta;
        }
        std::mem::swap(&mut err, &mut next_err);
    }
    grads.check_finite()?;
    Ok(grads)
}

/// Gradients of the squared-error cost `½‖qL − target‖²` with respect to
/// every event-matrix entry and the sharpness.
pub fn backward(net: &FdesNetwork, trace: &ForwardTrace, target: &FuzzyState) -> Result<GradientSet> {
    check_trace(net, trace)?;
    let out = trace.output();
    if target.dim() != out.dim() {
        return Err(Error::Dimension {
            context: "backward target",
            expected: out.dim(),
            actual: target.dim(),
        });
    }
    let err: Vec<f64> = out
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(s, t)| s - t)
        .collect();
    backward_from_output_grad(net, trace, &err)
}

/// Independent oracle: central finite differences of the cost with respect
/// to every entry and the sharpness.
///
/// The step shrinks near the `[0,1]` bounds so the perturbed entry never
/// leaves the domain; an entry sitting exactly on a bound falls back to a
/// one-sided difference pointing inward.
pub fn finite_diff_gradients(
    net: &FdesNetwork,
    q0: &FuzzyState,
    target: &FuzzyState,
    h: f64,
) -> Result<GradientSet> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Parameter(format!("step h must be positive, got {h}")));
    }
    let n = net.dim();
    let depth = net.depth();
    let eval = |candidate: &FdesNetwork| -> Result<f64> {
        let trace = candidate.forward(q0)?;
        cost(trace.output(), target)
    };
    let mut grads = GradientSet::zeros(n, depth);
    let mut work = net.clone();
    for k in 0..depth {
        for i in 0..n {
            for j in 0..n {
                let a = net.layers()[k].get(i, j);
                let eff = h.min(a).min(1.0 - a);
                let estimate = if eff > 0.0 {
                    work.layers_mut()[k].set(i, j, a + eff);
                    let up = eval(&work)?;
                    work.layers_mut()[k].set(i, j, a - eff);
                    let down = eval(&work)?;
                    (up - down) / (2.0 * eff)
                } else if a == 0.0 {
                    work.layers_mut()[k].set(i, j, a + h);
                    let up = eval(&work)?;
                    work.layers_mut()[k].set(i, j, a);
                    (up - eval(&work)?) / h
                } else {
                    work.layers_mut()[k].set(i, j, a - h);
                    let down = eval(&work)?;
                    work.layers_mut()[k].set(i, j, a);
                    (eval(&work)? - down) / h
                };
                work.layers_mut()[k].set(i, j, a);
                grads.layer_grads[k][i * n + j] = estimate;
            }
        }
    }
    let delta = net.sharpness();
    let dh = (h * delta.max(1.0)).min(delta / 2.0);
    work.set_sharpness(delta + dh)?;
    let up = eval(&work)?;
    work.set_sharpness(delta - dh)?;
    let down = eval(&work)?;
    work.set_sharpness(delta)?;
    grads.sharpness_grad = (up - down) / (2.0 * dh);
    grads.check_finite()?;
    Ok(grads)
}

/// Scale-aware worst-case relative disagreement between two gradient sets,
/// sharpness gradients included.
///
/// Each pair is compared against `max(|a|, |b|, floor)` with
/// `floor = max(0.01 * ginf, 1e-8)`, `ginf` the largest magnitude across
/// both sets. The floor matters at high sharpness: non-argmax softmax
/// weights are as small as `e^{-delta}`, putting true gradients near 1e-9
/// where the oracle's cancellation noise lives, and a bare relative error
/// would report pure noise. Entries that small are noise relative to the
/// instance's gradient scale, which is what the floor encodes.
pub fn max_relative_error(a: &GradientSet, b: &GradientSet) -> Result<f64> {
    if a.n != b.n || a.depth() != b.depth() {
        return Err(Error::Dimension {
            context: "max_relative_error",
            expected: a.n,
            actual: b.n,
        });
    }
    let ginf = a.max_abs().max(b.max_abs());
    let floor = (0.01 * ginf).max(1e-8);
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(floor);
    let mut worst: f64 = rel(a.sharpness_grad, b.sharpness_grad);
    for (la, lb) in a.layer_grads.iter().zip(&b.layer_grads) {
        for (&x, &y) in la.iter().zip(lb) {
            worst = worst.max(rel(x, y));
        }
    }
    Ok(worst)
}

/// One instance of the seeded gradient-check sweep.
#[derive(Debug, Clone)]
pub struct GradCheckCase {
    pub dim: usize,
    pub depth: usize,
    pub sharpness: f64,
    pub seed: u64,
}

/// The standard sweep: dims {2, 4, 8} x depths {1, 2, 4} x sharpness
/// {1, 5, 20}, cycled in order until `instances` cases, each with its own
/// seed derived from `base_seed`.
pub fn gradient_check_cases(instances: usize, base_seed: u64) -> Vec<GradCheckCase> {
    let dims = [2usize, 4, 8];
    let depths = [1usize, 2, 4];
    let sharps = [1.0f64, 5.0, 20.0];
    (0..instances)
        .map(|k| {
            let combo = k % 27;
            GradCheckCase {
                dim: dims[combo / 9],
                depth: depths[(combo / 3) % 3],
                sharpness: sharps[combo % 3],
                seed: crate::seeds::derive_seed(base_seed, &format!("gradcheck:{k}")),
            }
        })
        .collect()
}

/// Run one sweep case end to end: a random network, input, and target are
/// drawn from the case seed, and the result is the worst relative
/// disagreement between the analytic gradients and central differences
/// with step `h`. `perturbation` is added to the first analytic entry
/// before the comparison — a hook for exercising the failure path; pass
/// 0.0 for an honest check.
pub fn run_gradient_check(case: &GradCheckCase, h: f64, perturbation: f64) -> Result<f64> {
    use rand::Rng;
    let net = FdesNetwork::random(
        case.dim,
        case.depth,
        case.sharpness,
        crate::seeds::derive_seed(case.seed, "net"),
    )?;
    let mut rng = crate::seeds::rng_from_seed(crate::seeds::derive_seed(case.seed, "states"));
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| -> Result<FuzzyState> {
        FuzzyState::new((0..n).map(|_| rng.random_range(0.05..=0.95)).collect())
    };
    let q0 = draw(&mut rng, case.dim)?;
    let target = draw(&mut rng, case.dim)?;
    let trace = net.forward(&q0)?;
    let mut analytic = backward(&net, &trace, &target)?;
    analytic.layer_grads[0][0] += perturbation;
    let numeric = finite_diff_gradients(&net, &q0, &target, h)?;
    max_relative_error(&analytic, &numeric)
}

/// One projected gradient-descent step: `a ← clamp(a − γ·g, 0, 1)` on every
/// entry; the sharpness moves the same way only when `update_sharpness` is
/// set, and is floored at 1e-3 to stay positive.
pub fn sgd_step(
    net: &FdesNetwork,
    grads: &GradientSet,
    rate: f64,
    update_sharpness: bool,
) -> Result<FdesNetwork> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Parameter(format!(
            "learning rate must be positive, got {rate}"
        )));
    }
    if grads.n != net.dim() || grads.depth() != net.depth() {
        return Err(Error::Dimension {
            context: "sgd_step",
            expected: net.dim(),
            actual: grads.n,
        });
    }
    grads.check_finite()?;
    let mut out = net.clone();
    for (k, layer) in out.layers_mut().iter_mut().enumerate() {
        let g = &grads.layer_grads[k];
        for (entry, &grad) in layer.as_mut_slice().iter_mut().zip(g) {
            *entry = (*entry - rate * grad).clamp(0.0, 1.0);
        }
    }
    if update_sharpness {
        let new_delta = (net.sharpness() - rate * grads.sharpness_grad).max(1e-3);
        out.set_sharpness(new_delta)?;
    }
    Ok(out)
}
