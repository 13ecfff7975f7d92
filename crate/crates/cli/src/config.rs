//! The TOML run configuration: every pipeline constant in one place, with
//! defaults that reproduce the stock synthetic pipeline end to end.
//!
//! Numeric constraints of the owning modules are re-checked at load so a
//! bad file fails before any work starts, not three commands in.

use fdesq_core::backtest::{BacktestConfig, BaselineKind};
use fdesq_core::gan::GanConfig;
use fdesq_core::market::DecayScheme;
use fdesq_core::screen::ScreenConfig;
use fdesq_core::synth::EventMarketConfig;
use fdesq_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub ticker: String,
    pub paths: PathsSection,
    pub window: WindowSection,
    pub screen: ScreenSection,
    pub gan: GanSection,
    pub backtest: BacktestSection,
    pub simulate: SimulateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            ticker: "EVT".into(),
            paths: PathsSection::default(),
            window: WindowSection::default(),
            screen: ScreenSection::default(),
            gan: GanSection::default(),
            backtest: BacktestSection::default(),
            simulate: SimulateSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    pub data: PathBuf,
    pub out: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection { data: "data".into(), out: "out".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowSection {
    pub length: usize,
    /// `"linear"` or `"exponential"`.
    pub decay: String,
    /// Decay constant for the exponential scheme; ignored for linear.
    pub lambda: f64,
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection { length: 10, decay: "linear".into(), lambda: 0.35 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScreenSection {
    pub permutations: usize,
    pub r_threshold: f64,
    pub alpha: f64,
}

impl Default for ScreenSection {
    fn default() -> Self {
        ScreenSection { permutations: 10_000, r_threshold: 0.95, alpha: 0.05 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GanSection {
    pub rounds: usize,
    pub disc_steps: usize,
    pub gen_steps: usize,
    pub residual_steps: usize,
    pub disc_rate: f64,
    pub gen_rate: f64,
    pub residual_rate: f64,
    pub gen_depth: usize,
    pub sharpness: f64,
}

impl Default for GanSection {
    fn default() -> Self {
        GanSection {
            rounds: 150,
            disc_steps: 5,
            gen_steps: 1,
            residual_steps: 40,
            disc_rate: 0.5,
            gen_rate: 0.0,
            residual_rate: 1.0,
            gen_depth: 1,
            sharpness: 20.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacktestSection {
    /// `"martingale"`, `"weighted-linear"`, or `"oracle"`.
    pub baseline: String,
    pub train_len: usize,
    pub eval_len: usize,
    pub refit_interval: Option<usize>,
}

impl Default for BacktestSection {
    fn default() -> Self {
        BacktestSection {
            baseline: "weighted-linear".into(),
            train_len: 120,
            eval_len: 100,
            refit_interval: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub length: usize,
    pub era: usize,
    pub price_lo: f64,
    pub price_hi: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection { length: 220, era: 18, price_lo: 20.0, price_hi: 80.0 }
    }
}

impl RunConfig {
    /// Read a config file, or fall back to the built-in defaults when no
    /// path is given. The parsed file is validated before it is returned.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let config = match path {
            None => RunConfig::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Io { path: p.display().to_string(), source: e })?;
                toml::from_str(&text).map_err(|e| Error::Parse {
                    path: p.display().to_string(),
                    line: e.span().map(|s| 1 + text[..s.start].lines().count() as u64).unwrap_or(0),
                    message: e.message().to_string(),
                })?
            }
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if self.ticker.is_empty() {
            return fail("ticker must be nonempty".into());
        }
        if self.window.length < 2 {
            return fail(format!("[window] length must be at least 2, got {}", self.window.length));
        }
        self.decay_scheme()?.weights(self.window.length)?;
        let s = &self.screen;
        if s.permutations == 0 {
            return fail("[screen] permutations must be at least 1".into());
        }
        if !(s.alpha > 0.0 && s.alpha < 1.0) {
            return fail(format!("[screen] alpha must lie in (0, 1), got {}", s.alpha));
        }
        if !(s.r_threshold > 0.0 && s.r_threshold <= 1.0) {
            return fail(format!("[screen] r_threshold must lie in (0, 1], got {}", s.r_threshold));
        }
        let g = &self.gan;
        if g.rounds == 0 || g.disc_steps == 0 || g.gen_steps == 0 {
            return fail("[gan] rounds, disc_steps, and gen_steps must be at least 1".into());
        }
        if g.gen_depth == 0 {
            return fail("[gan] gen_depth must be at least 1".into());
        }
        for (name, rate) in [
            ("disc_rate", g.disc_rate),
            ("gen_rate", g.gen_rate),
            ("residual_rate", g.residual_rate),
        ] {
            if !(rate.is_finite() && rate >= 0.0) {
                return fail(format!("[gan] {name} must be non-negative, got {rate}"));
            }
        }
        if !(g.sharpness.is_finite() && g.sharpness > 0.0) {
            return fail(format!("[gan] sharpness must be positive, got {}", g.sharpness));
        }
        let b = &self.backtest;
        self.baseline_kind()?;
        if b.train_len < 60 {
            return fail(format!("[backtest] train_len must be at least 60, got {}", b.train_len));
        }
        if b.eval_len < 10 {
            return fail(format!("[backtest] eval_len must be at least 10, got {}", b.eval_len));
        }
        if b.refit_interval == Some(0) {
            return fail("[backtest] refit_interval must be at least 1 when set".into());
        }
        let m = &self.simulate;
        if m.era <= self.window.length {
            return fail(format!(
                "[simulate] era must exceed [window] length, got era {} with window {}",
                m.era, self.window.length
            ));
        }
        if m.length <= m.era {
            return fail(format!(
                "[simulate] length must exceed era, got length {} with era {}",
                m.length, m.era
            ));
        }
        if !(m.price_lo.is_finite() && m.price_hi.is_finite() && m.price_lo > 0.0) {
            return fail("[simulate] price band must be finite and positive".into());
        }
        if m.price_hi <= m.price_lo {
            return fail(format!("[simulate] price band is empty: [{}, {}]", m.price_lo, m.price_hi));
        }
        Ok(())
    }

    pub fn decay_scheme(&self) -> Result<DecayScheme> {
        match self.window.decay.as_str() {
            "linear" => Ok(DecayScheme::Linear),
            "exponential" => Ok(DecayScheme::Exponential { lambda: self.window.lambda }),
            other => Err(Error::Parameter(format!(
                "[window] decay must be `linear` or `exponential`, got `{other}`"
            ))),
        }
    }

    pub fn baseline_kind(&self) -> Result<BaselineKind> {
        match self.backtest.baseline.as_str() {
            "martingale" => Ok(BaselineKind::Martingale),
            "weighted-linear" => Ok(BaselineKind::WeightedLinear),
            "oracle" => Ok(BaselineKind::Oracle),
            other => Err(Error::Parameter(format!(
                "[backtest] baseline must be `martingale`, `weighted-linear`, or `oracle`, got `{other}`"
            ))),
        }
    }

    pub fn screen_config(&self) -> ScreenConfig {
        ScreenConfig {
            r_threshold: self.screen.r_threshold,
            alpha: self.screen.alpha,
            permutations: self.screen.permutations,
            seed: self.seed,
        }
    }

    pub fn gan_config(&self) -> GanConfig {
        GanConfig {
            rounds: self.gan.rounds,
            disc_steps: self.gan.disc_steps,
            gen_steps: self.gan.gen_steps,
            residual_steps: self.gan.residual_steps,
            disc_rate: self.gan.disc_rate,
            gen_rate: self.gan.gen_rate,
            residual_rate: self.gan.residual_rate,
            gen_depth: self.gan.gen_depth,
            sharpness: self.gan.sharpness,
            seed: self.seed,
            labels: None,
        }
    }

    pub fn backtest_config(&self) -> Result<BacktestConfig> {
        Ok(BacktestConfig {
            baseline: self.baseline_kind()?,
            window: self.window.length,
            decay: self.decay_scheme()?,
            train_len: self.backtest.train_len,
            eval_len: self.backtest.eval_len,
            refit_interval: self.backtest.refit_interval,
        })
    }

    pub fn market_config(&self) -> EventMarketConfig {
        EventMarketConfig {
            window: self.window.length,
            length: self.simulate.length,
            era: self.simulate.era,
            seed: self.seed,
            ticker: self.ticker.clone(),
            price_lo: self.simulate.price_lo,
            price_hi: self.simulate.price_hi,
        }
    }
}
