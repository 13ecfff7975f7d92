//! Adversarial adjuster: a logistic discriminator against the FDES
//! generator, plus a supervised residual head so the trained generator can
//! correct baseline forecasts.
//!
//! The generator is a plain [`FdesNetwork`] conditioned on the current real
//! window. Three interleaved updates run per round:
//!
//! 1. discriminator ascent on `mean log D(real) + mean log(1 - D(fake))`;
//! 2. generator descent on the non-saturating loss `-mean log D(fake)`,
//!    whose output gradient chains through the shared FDES backward pass;
//! 3. supervised descent pulling the generator's readout (last component
//!    of `qL`) toward `0.5 + residual` for each window's baseline residual.
//!
//! Step 3 is what makes the adjuster useful downstream: the adversarial
//! game shapes whole trajectories, the residual head pins the one
//! component that [`apply_adjustment`] consumes. Adjustments are measured
//! against the readout on an all-0.5 reference window, so any constant
//! offset the generator carries cancels out.

use crate::error::{Error, Result};
use crate::fdes::{
    backward_from_output_grad, network_to_string, parse_network_partial, sgd_step, FdesNetwork,
    FuzzyState, GradientSet,
};
use crate::market::Scaler;
use crate::seeds::derive_seed;
use std::fmt::Write as _;
use std::path::Path;

/// Single-layer logistic discriminator over W-day windows.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    weights: Vec<f64>,
    bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl Discriminator {
    /// Zero-initialized: scores 0.5 everywhere until trained.
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Input("discriminator needs a positive dimension".into()));
        }
        Ok(Discriminator {
            weights: vec![0.0; dim],
            bias: 0.0,
        })
    }

    pub fn from_parts(weights: Vec<f64>, bias: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Input("discriminator needs a positive dimension".into()));
        }
        for (i, w) in weights.iter().chain(std::iter::once(&bias)).enumerate() {
            if !w.is_finite() {
                return Err(Error::Numerical(format!(
                    "discriminator parameter {i} is not finite: {w}"
                )));
            }
        }
        Ok(Discriminator { weights, bias })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

/// `logistic(bias + w · window)`, always strictly inside (0, 1).
pub fn discriminator_score(d: &Discriminator, window: &FuzzyState) -> Result<f64> {
    if window.dim() != d.dim() {
        return Err(Error::Dimension {
            context: "discriminator_score",
            expected: d.dim(),
            actual: window.dim(),
        });
    }
    let z = d.bias
        + d.weights
            .iter()
            .zip(window.as_slice())
            .map(|(w, x)| w * x)
            .sum::<f64>();
    Ok(sigmoid(z))
}

/// One gradient-ascent step on the balanced log-likelihood
/// `mean log D(real) + mean log(1 - D(fake))`. Returns the updated
/// discriminator and the (pre-step) likelihood value.
pub fn discriminator_step(
    d: &Discriminator,
    real: &[FuzzyState],
    fake: &[FuzzyState],
    rate: f64,
) -> Result<(Discriminator, f64)> {
    if real.is_empty() || fake.is_empty() {
        return Err(Error::Input("discriminator batches must be nonempty".into()));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Parameter(format!(
            "discriminator rate must be non-negative, got {rate}"
        )));
    }
    let w = d.dim();
    let mut grad_w = vec![0.0; w];
    let mut grad_b = 0.0;
    let mut likelihood = 0.0;
    let rn = real.len() as f64;
    let fm = fake.len() as f64;
    for window in real {
        let s = discriminator_score(d, window)?;
        likelihood += s.ln() / rn;
        // d log D / dz = 1 - D
        let f = (1.0 - s) / rn;
        for (g, x) in grad_w.iter_mut().zip(window.as_slice()) {
            *g += f * x;
        }
        grad_b += f;
    }
    for window in fake {
        let s = discriminator_score(d, window)?;
        likelihood += (1.0 - s).ln() / fm;
        // d log(1-D) / dz = -D
        let f = -s / fm;
        for (g, x) in grad_w.iter_mut().zip(window.as_slice()) {
            *g += f * x;
        }
        grad_b += f;
    }
    let weights = d
        .weights
        .iter()
        .zip(&grad_w)
        .map(|(w, g)| w + rate * g)
        .collect();
    let updated = Discriminator::from_parts(weights, d.bias + rate * grad_b)?;
    Ok((updated, likelihood))
}

/// Fraction of windows the discriminator classifies correctly at the 0.5
/// threshold (real scored >= 0.5, fake scored < 0.5).
pub fn discriminator_accuracy(
    d: &Discriminator,
    real: &[FuzzyState],
    fake: &[FuzzyState],
) -> Result<f64> {
    if real.is_empty() || fake.is_empty() {
        return Err(Error::Input("accuracy batches must be nonempty".into()));
    }
    let mut correct = 0usize;
    for window in real {
        if discriminator_score(d, window)? >= 0.5 {
            correct += 1;
        }
    }
    for window in fake {
        if discriminator_score(d, window)? < 0.5 {
            correct += 1;
        }
    }
    Ok(correct as f64 / (real.len() + fake.len()) as f64)
}

fn generated_windows(g: &FdesNetwork, seeds: &[FuzzyState]) -> Result<Vec<FuzzyState>> {
    seeds
        .iter()
        .map(|q| Ok(g.forward(q)?.output().clone()))
        .collect()
}

/// One descent step on the non-saturating generator loss
/// `-mean log D(forward(g, seed))`. The discriminator's chain factor
/// `-(1 - D) * w_j` seeds the shared FDES backward pass. Returns the
/// updated generator and the (pre-step) loss.
pub fn generator_step(
    g: &FdesNetwork,
    d: &Discriminator,
    seeds: &[FuzzyState],
    rate: f64,
) -> Result<(FdesNetwork, f64)> {
    if seeds.is_empty() {
        return Err(Error::Input("generator seed batch must be nonempty".into()));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Parameter(format!(
            "generator rate must be non-negative, got {rate}"
        )));
    }
    if g.dim() != d.dim() {
        return Err(Error::Dimension {
            context: "generator_step",
            expected: d.dim(),
            actual: g.dim(),
        });
    }
    let k = seeds.len() as f64;
    let mut batch: Option<GradientSet> = None;
    let mut loss = 0.0;
    for q in seeds {
        let trace = g.forward(q)?;
        let s = discriminator_score(d, trace.output())?;
        loss += -s.ln() / k;
        // d(-log D)/d qL_j = -(1 - D) * w_j, averaged over the batch.
        let factor = -(1.0 - s) / k;
        let output_grad: Vec<f64> = d.weights.iter().map(|w| factor * w).collect();
        let grads = backward_from_output_grad(g, &trace, &output_grad)?;
        match &mut batch {
            Some(acc) => acc.accumulate(&grads, 1.0)?,
            None => batch = Some(grads),
        }
    }
    let batch = batch.expect("nonempty batch");
    let updated = if rate > 0.0 {
        sgd_step(g, &batch, rate, false)?
    } else {
        g.clone()
    };
    Ok((updated, loss))
}

/// One descent step pulling the generator readout (last component of `qL`)
/// toward each window's encoded residual target `clamp(0.5 + residual)`.
/// Returns the updated generator and the (pre-step) mean squared readout
/// error.
pub fn residual_step(
    g: &FdesNetwork,
    windows: &[FuzzyState],
    residuals: &[f64],
    rate: f64,
) -> Result<(FdesNetwork, f64)> {
    if windows.is_empty() {
        return Err(Error::Input("residual batch must be nonempty".into()));
    }
    if windows.len() != residuals.len() {
        return Err(Error::Dimension {
            context: "residual_step",
            expected: windows.len(),
            actual: residuals.len(),
        });
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(Error::Parameter(format!(
            "residual rate must be non-negative, got {rate}"
        )));
    }
    let w = g.dim();
    let k = windows.len() as f64;
    let mut batch: Option<GradientSet> = None;
    let mut loss = 0.0;
    for (window, residual) in windows.iter().zip(residuals) {
        let target = (0.5 + residual).clamp(0.0, 1.0);
        let trace = g.forward(window)?;
        let readout = trace.output()[w - 1];
        let err = readout - target;
        loss += 0.5 * err * err / k;
        let mut output_grad = vec![0.0; w];
        output_grad[w - 1] = err / k;
        let grads = backward_from_output_grad(g, &trace, &output_grad)?;
        match &mut batch {
            Some(acc) => acc.accumulate(&grads, 1.0)?,
            None => batch = Some(grads),
        }
    }
    let batch = batch.expect("nonempty batch");
    let updated = if rate > 0.0 {
        sgd_step(g, &batch, rate, false)?
    } else {
        g.clone()
    };
    Ok((updated, loss))
}

/// Knobs for one adversarial training run.
#[derive(Debug, Clone)]
pub struct GanConfig {
    pub rounds: usize,
    pub disc_steps: usize,
    pub gen_steps: usize,
    /// Supervised residual steps per round; 0 disables the residual head.
    pub residual_steps: usize,
    pub disc_rate: f64,
    pub gen_rate: f64,
    pub residual_rate: f64,
    /// Generator depth (layer count).
    pub gen_depth: usize,
    pub sharpness: f64,
    pub seed: u64,
    /// Optional per-layer event labels; defaults to `layer0..layerL-1`.
    pub labels: Option<Vec<String>>,
}

impl Default for GanConfig {
    fn default() -> Self {
        GanConfig {
            rounds: 30,
            disc_steps: 5,
            gen_steps: 5,
            residual_steps: 10,
            disc_rate: 0.5,
            gen_rate: 0.05,
            residual_rate: 2.0,
            gen_depth: 2,
            sharpness: 10.0,
            seed: 0,
            labels: None,
        }
    }
}

impl GanConfig {
    fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.disc_steps == 0 || self.gen_steps == 0 {
            return Err(Error::Parameter(
                "rounds, disc_steps, and gen_steps must be at least 1".into(),
            ));
        }
        if self.gen_depth == 0 {
            return Err(Error::Parameter("generator depth must be at least 1".into()));
        }
        for (name, rate) in [
            ("disc_rate", self.disc_rate),
            ("gen_rate", self.gen_rate),
            ("residual_rate", self.residual_rate),
        ] {
            if !(rate.is_finite() && rate >= 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be non-negative, got {rate}"
                )));
            }
        }
        if !(self.sharpness.is_finite() && self.sharpness > 0.0) {
            return Err(Error::Parameter(format!(
                "sharpness must be positive, got {}",
                self.sharpness
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.gen_depth {
                return Err(Error::Dimension {
                    context: "GanConfig labels",
                    expected: self.gen_depth,
                    actual: labels.len(),
                });
            }
        }
        Ok(())
    }
}

/// Per-round training record.
#[derive(Debug, Clone, PartialEq)]
pub struct GanRound {
    pub round: usize,
    pub d_loss: f64,
    pub g_loss: f64,
    pub d_acc: f64,
}

/// The trained adjuster: generator, its discriminator opponent, per-layer
/// labels, and the scaler of the series it was trained against. Labels and
/// scaler are runtime annotations; serialization persists only the
/// generator and discriminator parameters.
#[derive(Debug, Clone)]
pub struct AdjusterModel {
    pub generator: FdesNetwork,
    pub discriminator: Discriminator,
    pub labels: Vec<String>,
    pub scaler: Option<Scaler>,
}

impl AdjusterModel {
    /// The adjuster's scalar output for a window: last component of `qL`.
    pub fn readout(&self, window: &FuzzyState) -> Result<f64> {
        let trace = self.generator.forward(window)?;
        Ok(trace.output()[self.generator.dim() - 1])
    }

    /// Readout on the all-0.5 reference window; the zero point of
    /// adjustments.
    pub fn neutral(&self) -> Result<f64> {
        let reference = FuzzyState::new(vec![0.5; self.generator.dim()])?;
        self.readout(&reference)
    }
}

/// `adjusted = baseline + (adjuster output - neutral)`, all in normalized
/// units. Exactly additive; may leave [0,1], which denormalization handles.
pub fn apply_adjustment(baseline: f64, adjuster_output: f64, neutral: f64) -> f64 {
    baseline + (adjuster_output - neutral)
}

/// Run the alternating loop: per round, `disc_steps` discriminator ascent
/// steps against the current generator's outputs, `gen_steps` adversarial
/// generator steps, then `residual_steps` supervised residual steps.
/// `residuals[i]` is window `i`'s baseline residual (actual − baseline
/// prediction, normalized units).
pub fn gan_train(
    config: &GanConfig,
    windows: &[FuzzyState],
    residuals: &[f64],
) -> Result<(AdjusterModel, Vec<GanRound>)> {
    config.validate()?;
    if windows.is_empty() {
        return Err(Error::Input("gan_train needs at least one window".into()));
    }
    if windows.len() != residuals.len() {
        return Err(Error::Dimension {
            context: "gan_train residuals",
            expected: windows.len(),
            actual: residuals.len(),
        });
    }
    let w = windows[0].dim();
    for win in windows {
        if win.dim() != w {
            return Err(Error::Dimension {
                context: "gan_train windows",
                expected: w,
                actual: win.dim(),
            });
        }
    }

    let mut generator = FdesNetwork::random(
        w,
        config.gen_depth,
        config.sharpness,
        derive_seed(config.seed, "generator"),
    )?;
    let mut discriminator = Discriminator::new(w)?;
    let mut history = Vec::with_capacity(config.rounds);

    for round in 0..config.rounds {
        // The generator is frozen while the discriminator trains, so its
        // fakes are computed once per round.
        let fakes = generated_windows(&generator, windows)?;
        let mut d_loss = 0.0;
        for _ in 0..config.disc_steps {
            let (next, loss) = discriminator_step(&discriminator, windows, &fakes, config.disc_rate)?;
            discriminator = next;
            d_loss = loss;
        }
        let mut g_loss = 0.0;
        for _ in 0..config.gen_steps {
            let (next, loss) = generator_step(&generator, &discriminator, windows, config.gen_rate)?;
            generator = next;
            g_loss = loss;
        }
        for _ in 0..config.residual_steps {
            let (next, _) = residual_step(&generator, windows, residuals, config.residual_rate)?;
            generator = next;
        }
        let end_fakes = generated_windows(&generator, windows)?;
        let d_acc = discriminator_accuracy(&discriminator, windows, &end_fakes)?;
        history.push(GanRound {
            round,
            d_loss,
            g_loss,
            d_acc,
        });
    }

    let labels = config
        .labels
        .clone()
        .unwrap_or_else(|| (0..config.gen_depth).map(|k| format!("layer{k}")).collect());
    Ok((
        AdjusterModel {
            generator,
            discriminator,
            labels,
            scaler: None,
        },
        history,
    ))
}

/// Serialize: the network text format followed by one
/// `disc v1 w0..w{W-1} b` line.
pub fn adjuster_to_string(model: &AdjusterModel) -> String {
    let mut out = network_to_string(&model.generator);
    let mut line = String::from("disc v1");
    for w in model.discriminator.weights() {
        let _ = write!(line, " {:.16e}", w);
    }
    let _ = write!(line, " {:.16e}", model.discriminator.bias());
    out.push_str(&line);
    out.push('\n');
    out
}

pub fn parse_adjuster(text: &str, origin: &str) -> Result<AdjusterModel> {
    let lines: Vec<&str> = text.lines().collect();
    let (generator, consumed) = parse_network_partial(&lines, origin, 0)?;
    let disc_line = lines
        .get(consumed)
        .ok_or_else(|| Error::Parse {
            path: origin.to_string(),
            line: (consumed + 1) as u64,
            message: "missing discriminator line".into(),
        })?;
    let tok: Vec<&str> = disc_line.split_whitespace().collect();
    let expected = 2 + generator.dim() + 1;
    if tok.len() != expected || tok[0] != "disc" || tok[1] != "v1" {
        return Err(Error::Parse {
            path: origin.to_string(),
            line: (consumed + 1) as u64,
            message: format!("bad discriminator line, expected `disc v1` and {} values", generator.dim() + 1),
        });
    }
    let values: Vec<f64> = tok[2..]
        .iter()
        .map(|t| {
            t.parse::<f64>().map_err(|_| Error::Parse {
                path: origin.to_string(),
                line: (consumed + 1) as u64,
                message: format!("bad discriminator value `{t}`"),
            })
        })
        .collect::<Result<_>>()?;
    let (weights, bias) = values.split_at(generator.dim());
    let discriminator = Discriminator::from_parts(weights.to_vec(), bias[0])?;
    for (idx, rest) in lines[consumed + 1..].iter().enumerate() {
        if !rest.trim().is_empty() {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: (consumed + idx + 2) as u64,
                message: "trailing content after adjuster".into(),
            });
        }
    }
    let depth = generator.depth();
    Ok(AdjusterModel {
        generator,
        discriminator,
        labels: (0..depth).map(|k| format!("layer{k}")).collect(),
        scaler: None,
    })
}

pub fn save_adjuster(model: &AdjusterModel, path: &Path) -> Result<()> {
    std::fs::write(path, adjuster_to_string(model))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_adjuster(path: &Path) -> Result<AdjusterModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_adjuster(&text, &path.display().to_string())
}

/// Emit training history as `round,d_loss,g_loss,d_acc`.
pub fn write_history_csv(history: &[GanRound], path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Data {
        path: display.clone(),
        message: e.to_string(),
    })?;
    writer
        .write_record(["round", "d_loss", "g_loss", "d_acc"])
        .map_err(|e| Error::Data {
            path: display.clone(),
            message: e.to_string(),
        })?;
    for r in history {
        writer
            .write_record([
                r.round.to_string(),
                r.d_loss.to_string(),
                r.g_loss.to_string(),
                r.d_acc.to_string(),
            ])
            .map_err(|e| Error::Data {
                path: display.clone(),
                message: e.to_string(),
            })?;
    }
    writer.flush().map_err(|e| Error::io(&display, e))?;
    Ok(())
}
