//! Walk-forward backtesting of baseline predictors against their
//! adjusted counterparts.
//!
//! The scaler is fitted once on the training segment and frozen: every
//! later prediction normalizes through that map, so evaluation values can
//! leave `[0,1]` and the denormalized outputs extrapolate linearly. The
//! prediction for day `d` sees values up to day `d-1` only — the window
//! ends today, the target is tomorrow — and the optional refit interval
//! re-estimates the weighted-linear coefficients on exactly the data
//! available at the refit day.
//!
//! Directional accuracy is evaluated in normalized units, where a
//! martingale's "no move" prediction is an exact floating-point zero; in
//! price units the round trip through the scaler would blur that tie.
//! Signs are invariant under the (positive-slope) affine scaler, so the
//! choice changes nothing else.

mod linear;
mod report;

pub use linear::{fit_weighted_linear, predict_weighted_linear, WeightedLinear};
pub use report::{emit_report, read_metrics_csv, read_report_csv, recompute_price_metrics};

use crate::error::{Error, Result};
use crate::fdes::FuzzyState;
use crate::gan::{apply_adjustment, gan_train, AdjusterModel, GanConfig, GanRound};
use crate::market::{DecayScheme, PriceSeries, RollingWindowSample, Scaler};
use chrono::NaiveDate;
use std::fmt;

/// Which baseline produces the unadjusted prediction.
///
/// `Oracle` predicts tomorrow's actual close and exists for tests and
/// diagnostics: it pins the metric ceiling (zero error, perfect
/// direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Martingale,
    WeightedLinear,
    Oracle,
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::Martingale => "martingale",
            BaselineKind::WeightedLinear => "weighted-linear",
            BaselineKind::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "martingale" => Ok(BaselineKind::Martingale),
            "weighted-linear" => Ok(BaselineKind::WeightedLinear),
            "oracle" => Ok(BaselineKind::Oracle),
            other => Err(Error::Parameter(format!(
                "unknown baseline `{other}` (expected martingale, weighted-linear, or oracle)"
            ))),
        }
    }
}

/// Split and model choices for one backtest run.
#[derive(Debug, Clone)]
pub struct BacktestConfig {
    pub baseline: BaselineKind,
    /// Window length W fed to both the linear baseline and the adjuster.
    pub window: usize,
    pub decay: DecayScheme,
    /// Days in the frozen training segment.
    pub train_len: usize,
    /// Days evaluated immediately after the training segment.
    pub eval_len: usize,
    /// Refit the weighted-linear coefficients every this many evaluation
    /// days; `None` keeps the single frozen fit.
    pub refit_interval: Option<usize>,
}

impl BacktestConfig {
    fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Parameter("window must be at least 1".into()));
        }
        if self.train_len < 60 {
            return Err(Error::Input(format!(
                "training segment needs at least 60 days, got {}",
                self.train_len
            )));
        }
        if self.eval_len < 10 {
            return Err(Error::Input(format!(
                "evaluation segment needs at least 10 days, got {}",
                self.eval_len
            )));
        }
        if self.train_len < self.window {
            return Err(Error::Input(format!(
                "training segment ({}) shorter than the window ({})",
                self.train_len, self.window
            )));
        }
        if self.baseline == BaselineKind::WeightedLinear && self.train_len < 2 * self.window + 1 {
            return Err(Error::Input(format!(
                "weighted-linear needs a training segment of at least {} days for window {}",
                2 * self.window + 1,
                self.window
            )));
        }
        if self.refit_interval == Some(0) {
            return Err(Error::Parameter("refit interval must be at least 1".into()));
        }
        Ok(())
    }

    /// One-line echo embedded in emitted metrics.
    pub fn echo(&self) -> String {
        let decay = match self.decay {
            DecayScheme::Linear => "linear".to_string(),
            DecayScheme::Exponential { lambda } => format!("exp({lambda})"),
        };
        let refit = match self.refit_interval {
            Some(k) => k.to_string(),
            None => "none".to_string(),
        };
        format!(
            "baseline={} window={} decay={} train={} eval={} refit={}",
            self.baseline, self.window, decay, self.train_len, self.eval_len, refit
        )
    }
}

/// One evaluated day, in price units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayRecord {
    pub date: NaiveDate,
    pub actual: f64,
    pub baseline: f64,
    pub adjusted: f64,
}

/// Error and direction summary for one strategy, prices for RMSE/MAE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyMetrics {
    pub rmse: f64,
    pub mae: f64,
    pub directional_accuracy: f64,
}

/// Everything one backtest run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub ticker: String,
    pub records: Vec<DayRecord>,
    pub baseline: StrategyMetrics,
    pub adjusted: StrategyMetrics,
    /// The configuration echo written into the metrics file.
    pub config: String,
    pub warnings: Vec<String>,
}

/// The martingale rule: tomorrow looks like today.
pub fn predict_martingale(window: &[f64]) -> Result<f64> {
    window
        .last()
        .copied()
        .ok_or_else(|| Error::Input("martingale needs a nonempty window".into()))
}

/// `sign(predicted move) == sign(actual move)`; a tie is right only when
/// both moves are zero.
fn direction_hit(pred_move: f64, actual_move: f64) -> bool {
    if pred_move == 0.0 || actual_move == 0.0 {
        pred_move == 0.0 && actual_move == 0.0
    } else {
        (pred_move > 0.0) == (actual_move > 0.0)
    }
}

/// Training samples over `values[..limit]`: windows ending at each day
/// `t < limit - 1`, next-day targets. Mirrors `rolling_windows` but admits
/// out-of-range normalized values, which refits past the training segment
/// produce.
fn linear_fit_samples(
    values: &[f64],
    w: usize,
    limit: usize,
    scheme: DecayScheme,
) -> Result<Vec<RollingWindowSample>> {
    let weights = scheme.weights(w)?;
    let mut samples = Vec::with_capacity(limit.saturating_sub(w));
    for t in (w - 1)..limit.saturating_sub(1) {
        samples.push(RollingWindowSample {
            window: FuzzyState::from_raw(values[t + 1 - w..=t].to_vec()),
            weights: weights.clone(),
            target: values[t + 1],
        });
    }
    Ok(samples)
}

fn fit_linear_until(
    values: &[f64],
    config: &BacktestConfig,
    limit: usize,
    warnings: &mut Vec<String>,
) -> Result<WeightedLinear> {
    let samples = linear_fit_samples(values, config.window, limit, config.decay)?;
    let model = fit_weighted_linear(&samples)?;
    if model.is_fallback() {
        warnings.push(format!(
            "singular normal equations on data up to day {limit}; weighted-linear fell back to martingale"
        ));
    }
    Ok(model)
}

/// Run the walk-forward evaluation of `config.baseline`, with and without
/// the adjuster. When no adjuster is given the adjusted strategy equals
/// the baseline bit for bit.
pub fn backtest(
    series: &PriceSeries,
    config: &BacktestConfig,
    adjuster: Option<&AdjusterModel>,
) -> Result<BacktestReport> {
    config.validate()?;
    let n = series.len();
    if n < config.train_len + config.eval_len {
        return Err(Error::Input(format!(
            "series `{}` has {n} days, need {} (train {} + eval {})",
            series.ticker(),
            config.train_len + config.eval_len,
            config.train_len,
            config.eval_len
        )));
    }
    let closes = series.closes();
    let dates = series.dates();

    let train = &closes[..config.train_len];
    let lo = train.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = train.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::DegenerateRange { value: lo });
    }
    let scaler = Scaler::new(lo, hi)?;
    let values: Vec<f64> = closes.iter().map(|&p| scaler.apply(p)).collect();

    let w = config.window;
    if let Some(model) = adjuster {
        if model.generator.dim() != w {
            return Err(Error::Dimension {
                context: "backtest adjuster",
                expected: w,
                actual: model.generator.dim(),
            });
        }
    }
    let neutral = adjuster.map(|m| m.neutral()).transpose()?;

    let mut warnings = Vec::new();
    let mut linear = match config.baseline {
        BaselineKind::WeightedLinear => Some(fit_linear_until(
            &values,
            config,
            config.train_len,
            &mut warnings,
        )?),
        _ => None,
    };

    let mut records = Vec::with_capacity(config.eval_len);
    let mut base_sq = 0.0;
    let mut base_abs = 0.0;
    let mut base_hits = 0usize;
    let mut adj_sq = 0.0;
    let mut adj_abs = 0.0;
    let mut adj_hits = 0usize;

    for (step, d) in (config.train_len..config.train_len + config.eval_len).enumerate() {
        if let Some(k) = config.refit_interval {
            if step > 0 && step % k == 0 && config.baseline == BaselineKind::WeightedLinear {
                linear = Some(fit_linear_until(&values, config, d, &mut warnings)?);
            }
        }
        let window = &values[d - w..d];
        let today = values[d - 1];
        let actual_norm = values[d];

        let base_norm = match config.baseline {
            BaselineKind::Martingale => predict_martingale(window)?,
            BaselineKind::WeightedLinear => {
                linear.as_ref().expect("fitted above").predict(window)?
            }
            BaselineKind::Oracle => actual_norm,
        };
        let adj_norm = match (adjuster, neutral) {
            (Some(model), Some(neutral)) => {
                let clamped: Vec<f64> = window.iter().map(|v| v.clamp(0.0, 1.0)).collect();
                let output = model.readout(&FuzzyState::new(clamped)?)?;
                apply_adjustment(base_norm, output, neutral)
            }
            _ => base_norm,
        };

        if direction_hit(base_norm - today, actual_norm - today) {
            base_hits += 1;
        }
        if direction_hit(adj_norm - today, actual_norm - today) {
            adj_hits += 1;
        }

        let actual = closes[d];
        // The oracle's price prediction is the close itself, not a value
        // that went through the scaler and back; its error is exactly zero.
        let baseline = match config.baseline {
            BaselineKind::Oracle => actual,
            _ => scaler.invert(base_norm),
        };
        let adjusted = if adjuster.is_some() {
            scaler.invert(adj_norm)
        } else {
            baseline
        };
        base_sq += (baseline - actual) * (baseline - actual);
        base_abs += (baseline - actual).abs();
        adj_sq += (adjusted - actual) * (adjusted - actual);
        adj_abs += (adjusted - actual).abs();
        records.push(DayRecord {
            date: dates[d],
            actual,
            baseline,
            adjusted,
        });
    }

    let days = config.eval_len as f64;
    Ok(BacktestReport {
        ticker: series.ticker().to_string(),
        records,
        baseline: StrategyMetrics {
            rmse: (base_sq / days).sqrt(),
            mae: base_abs / days,
            directional_accuracy: base_hits as f64 / days,
        },
        adjusted: StrategyMetrics {
            rmse: (adj_sq / days).sqrt(),
            mae: adj_abs / days,
            directional_accuracy: adj_hits as f64 / days,
        },
        config: config.echo(),
        warnings,
    })
}

/// Train an adjuster on the training segment of `series`, against the same
/// baseline the backtest will use.
///
/// Only `closes[..train_len]` is touched: the scaler is fitted there (so
/// every training window lies in the unit box exactly) and the baseline's
/// in-sample residuals there are the adversarial targets. The returned
/// model carries that scaler for later ingestion-side reuse.
pub fn train_adjuster(
    series: &PriceSeries,
    config: &BacktestConfig,
    gan: &GanConfig,
) -> Result<(AdjusterModel, Vec<GanRound>)> {
    config.validate()?;
    if series.len() < config.train_len {
        return Err(Error::Input(format!(
            "series `{}` has {} days, need {} to train",
            series.ticker(),
            series.len(),
            config.train_len
        )));
    }
    let train = &series.closes()[..config.train_len];
    let lo = train.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = train.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Err(Error::DegenerateRange { value: lo });
    }
    let scaler = Scaler::new(lo, hi)?;
    let values: Vec<f64> = train.iter().map(|&p| scaler.apply(p)).collect();

    let w = config.window;
    let linear = match config.baseline {
        BaselineKind::WeightedLinear => {
            let mut warnings = Vec::new();
            Some(fit_linear_until(&values, config, config.train_len, &mut warnings)?)
        }
        _ => None,
    };

    let mut windows = Vec::with_capacity(config.train_len - w);
    let mut residuals = Vec::with_capacity(config.train_len - w);
    for t in (w - 1)..(config.train_len - 1) {
        let window = &values[t + 1 - w..=t];
        let predicted = match config.baseline {
            BaselineKind::Martingale => predict_martingale(window)?,
            BaselineKind::WeightedLinear => linear.as_ref().expect("fitted above").predict(window)?,
            BaselineKind::Oracle => values[t + 1],
        };
        windows.push(FuzzyState::new(window.to_vec())?);
        residuals.push(values[t + 1] - predicted);
    }

    let (mut model, history) = gan_train(gan, &windows, &residuals)?;
    model.scaler = Some(scaler);
    Ok((model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{simulate_gbm, GbmParams};

    fn ramp_series(days: usize) -> PriceSeries {
        let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        let dates: Vec<NaiveDate> = (0..days)
            .map(|d| start + chrono::Days::new(d as u64))
            .collect();
        let closes: Vec<f64> = (0..days).map(|d| 10.0 + 0.25 * d as f64).collect();
        PriceSeries::new("RAMP", dates, closes).unwrap()
    }

    fn gbm_series(seed: u64, steps: usize) -> PriceSeries {
        let params = GbmParams {
            s0: 50.0,
            mu: 0.0005,
            sigma: 0.02,
            steps,
            paths: 1,
            seed,
        };
        simulate_gbm(&params).unwrap().remove(0)
    }

    fn base_config(kind: BaselineKind) -> BacktestConfig {
        BacktestConfig {
            baseline: kind,
            window: 10,
            decay: DecayScheme::Linear,
            train_len: 60,
            eval_len: 20,
            refit_interval: None,
        }
    }

    #[test]
    fn martingale_returns_last_component() {
        assert_eq!(predict_martingale(&[0.1, 0.9, 0.7]).unwrap(), 0.7);
        assert_eq!(predict_martingale(&[0.5; 8]).unwrap(), 0.5);
        assert!(predict_martingale(&[]).is_err());
    }

    #[test]
    fn martingale_on_a_ramp_never_calls_direction() {
        // A flat prediction has a zero move; a strictly increasing series
        // never does. Directional accuracy is exactly zero.
        let report = backtest(&ramp_series(90), &base_config(BaselineKind::Martingale), None)
            .unwrap();
        assert_eq!(report.baseline.directional_accuracy, 0.0);
        assert_eq!(report.adjusted.directional_accuracy, 0.0);
        assert!(report.baseline.rmse > 0.0);
        assert_eq!(report.records.len(), 20);
    }

    #[test]
    fn oracle_is_exact() {
        let report = backtest(&gbm_series(3, 90), &base_config(BaselineKind::Oracle), None)
            .unwrap();
        assert_eq!(report.baseline.rmse, 0.0);
        assert_eq!(report.baseline.mae, 0.0);
        assert_eq!(report.baseline.directional_accuracy, 1.0);
        assert_eq!(report.adjusted, report.baseline);
    }

    #[test]
    fn martingale_on_noise_has_positive_error() {
        let report = backtest(&gbm_series(4, 100), &base_config(BaselineKind::Martingale), None)
            .unwrap();
        assert!(report.baseline.rmse > 0.0);
        assert!(report.baseline.mae > 0.0);
        assert!(report.baseline.rmse >= report.baseline.mae);
        assert!((0.0..=1.0).contains(&report.baseline.directional_accuracy));
    }

    #[test]
    fn weighted_linear_runs_clean_on_noise() {
        let report = backtest(
            &gbm_series(5, 120),
            &base_config(BaselineKind::WeightedLinear),
            None,
        )
        .unwrap();
        assert!(report.warnings.is_empty(), "{:?}", report.warnings);
        assert!(report.baseline.rmse > 0.0);
        assert_eq!(report.records.len(), 20);
    }

    #[test]
    fn short_segments_are_rejected() {
        let series = gbm_series(6, 100);
        let mut config = base_config(BaselineKind::Martingale);
        config.train_len = 59;
        assert!(matches!(backtest(&series, &config, None), Err(Error::Input(_))));
        let mut config = base_config(BaselineKind::Martingale);
        config.eval_len = 9;
        assert!(matches!(backtest(&series, &config, None), Err(Error::Input(_))));
        let config = base_config(BaselineKind::Martingale);
        assert!(matches!(
            backtest(&gbm_series(7, 70), &config, None),
            Err(Error::Input(_))
        ));
        let mut config = base_config(BaselineKind::Martingale);
        config.refit_interval = Some(0);
        assert!(matches!(
            backtest(&series, &config, None),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn predictions_ignore_poisoned_future_days() {
        // Two series share the first 75 days; the second goes wild after.
        // Every record whose prediction and actual both predate the poison
        // must match bit for bit — the pipeline never peeks forward.
        let clean = gbm_series(8, 90);
        let cut = 75;
        let mut poisoned_closes = clean.closes().to_vec();
        for v in &mut poisoned_closes[cut..] {
            *v *= 1000.0;
        }
        let poisoned =
            PriceSeries::new(clean.ticker(), clean.dates().to_vec(), poisoned_closes).unwrap();

        let mut config = base_config(BaselineKind::WeightedLinear);
        config.refit_interval = Some(5);
        let report_clean = backtest(&clean, &config, None).unwrap();
        let report_poisoned = backtest(&poisoned, &config, None).unwrap();
        // Eval days run 60..80; records 0..15 have actuals before the cut.
        for i in 0..15 {
            assert_eq!(
                report_clean.records[i], report_poisoned.records[i],
                "record {i} diverged"
            );
        }
        // Day 75's prediction uses the clean prefix even though its actual
        // is poisoned.
        assert_eq!(
            report_clean.records[15].baseline,
            report_poisoned.records[15].baseline
        );
        assert_ne!(
            report_clean.records[15].actual,
            report_poisoned.records[15].actual
        );
    }

    #[test]
    fn refitting_changes_the_model() {
        let series = gbm_series(9, 130);
        let frozen = base_config(BaselineKind::WeightedLinear);
        let mut refit = base_config(BaselineKind::WeightedLinear);
        refit.refit_interval = Some(5);
        let a = backtest(&series, &frozen, None).unwrap();
        let b = backtest(&series, &refit, None).unwrap();
        assert_ne!(a.records, b.records);
        // The first refit happens at step 5, so earlier records agree.
        assert_eq!(a.records[..5], b.records[..5]);
    }

    #[test]
    fn adjuster_moves_predictions() {
        let series = gbm_series(10, 100);
        let config = base_config(BaselineKind::Martingale);
        // A tiny adversarial run; its exact quality is irrelevant, only
        // that the readout varies across windows.
        let closes = series.closes();
        let train = &closes[..60];
        let lo = train.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = train.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scaler = Scaler::new(lo, hi).unwrap();
        let values: Vec<f64> = train.iter().map(|&p| scaler.apply(p)).collect();
        let windows: Vec<FuzzyState> = (9..59)
            .map(|t| FuzzyState::new(values[t - 9..=t].to_vec()).unwrap())
            .collect();
        let residuals = vec![0.01; windows.len()];
        let gan_config = GanConfig {
            rounds: 2,
            disc_steps: 1,
            gen_steps: 1,
            residual_steps: 2,
            seed: 11,
            ..GanConfig::default()
        };
        let (model, _) = gan_train(&gan_config, &windows, &residuals).unwrap();

        let with = backtest(&series, &config, Some(&model)).unwrap();
        let without = backtest(&series, &config, None).unwrap();
        assert_eq!(with.records.iter().map(|r| r.baseline).collect::<Vec<_>>(),
                   without.records.iter().map(|r| r.baseline).collect::<Vec<_>>());
        assert!(
            with.records.iter().any(|r| r.adjusted != r.baseline),
            "adjuster left every prediction untouched"
        );
        assert!(with.adjusted.rmse.is_finite());
    }

    #[test]
    fn adjuster_dimension_mismatch_is_rejected() {
        let series = gbm_series(12, 100);
        let config = base_config(BaselineKind::Martingale);
        let windows: Vec<FuzzyState> = (0..6)
            .map(|i| {
                let mut rng = crate::seeds::rng_from_seed(600 + i);
                FuzzyState::new(
                    (0..4).map(|_| rand::Rng::random_range(&mut rng, 0.1..=0.9)).collect(),
                )
                .unwrap()
            })
            .collect();
        let residuals = vec![0.0; 6];
        let gan_config = GanConfig {
            rounds: 1,
            disc_steps: 1,
            gen_steps: 1,
            residual_steps: 1,
            seed: 13,
            ..GanConfig::default()
        };
        let (model, _) = gan_train(&gan_config, &windows, &residuals).unwrap();
        assert!(matches!(
            backtest(&series, &config, Some(&model)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn config_echo_names_the_run() {
        let mut config = base_config(BaselineKind::WeightedLinear);
        config.refit_interval = Some(7);
        let echo = config.echo();
        assert!(echo.contains("weighted-linear"));
        assert!(echo.contains("refit=7"));
        assert!(echo.contains("train=60"));
    }

    #[test]
    fn train_adjuster_carries_the_frozen_scaler() {
        let series = gbm_series(21, 100);
        let config = base_config(BaselineKind::Martingale);
        let gan_config = GanConfig {
            rounds: 2,
            disc_steps: 1,
            gen_steps: 1,
            residual_steps: 2,
            seed: 5,
            ..GanConfig::default()
        };
        let (model, history) = train_adjuster(&series, &config, &gan_config).unwrap();
        assert_eq!(history.len(), 2);
        let scaler = model.scaler.expect("training attaches the segment scaler");
        let train = &series.closes()[..config.train_len];
        let lo = train.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(scaler.apply(lo), 0.0);
        // Values outside the training segment are no concern of the scaler:
        // it reproduces the training min/max exactly.
        assert_eq!(model.generator.dim(), config.window);
    }

    #[test]
    fn train_adjuster_is_deterministic() {
        let series = gbm_series(22, 100);
        let config = base_config(BaselineKind::WeightedLinear);
        let gan_config = GanConfig {
            rounds: 3,
            seed: 9,
            ..GanConfig::default()
        };
        let (a, ha) = train_adjuster(&series, &config, &gan_config).unwrap();
        let (b, hb) = train_adjuster(&series, &config, &gan_config).unwrap();
        assert_eq!(ha, hb);
        for (la, lb) in a.generator.layers().iter().zip(b.generator.layers()) {
            assert_eq!(la.as_slice(), lb.as_slice());
        }
        assert_eq!(a.discriminator.weights(), b.discriminator.weights());
    }

    #[test]
    fn train_adjuster_rejects_short_series() {
        let series = gbm_series(23, 50);
        let config = base_config(BaselineKind::Martingale);
        assert!(matches!(
            train_adjuster(&series, &config, &GanConfig::default()),
            Err(Error::Input(_))
        ));
    }
}
