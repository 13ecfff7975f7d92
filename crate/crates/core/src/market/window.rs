//! RoI extraction and rolling training windows.

use crate::error::{Error, Result};
use crate::fdes::FuzzyState;
use crate::market::NormalizedSeries;
use std::path::Path;

/// How per-day weights decay with lag inside a window. Lag 0 is today
/// (the newest day); anything at lag ≥ W is simply outside the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayScheme {
    /// Weight of lag ℓ is (W−ℓ)/W: newest 1.0 down to 1/W for the oldest.
    Linear,
    /// Weight of lag ℓ is exp(−lambda·ℓ).
    Exponential { lambda: f64 },
}

impl DecayScheme {
    /// The weight vector for a W-day window, oldest position first.
    pub fn weights(&self, w: usize) -> Result<Vec<f64>> {
        let weights: Vec<f64> = match *self {
            DecayScheme::Linear => {
                // Oldest first: window position p has lag W-1-p.
                (0..w).map(|p| (p + 1) as f64 / w as f64).collect()
            }
            DecayScheme::Exponential { lambda } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::Parameter(format!(
                        "exponential decay needs lambda > 0, got {lambda}"
                    )));
                }
                (0..w).map(|p| (-lambda * (w - 1 - p) as f64).exp()).collect()
            }
        };
        Ok(weights)
    }
}

/// One supervised sample: a W-day window (oldest first), its decay weights,
/// and the normalized close `horizon` days after the window's last day.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingWindowSample {
    pub window: FuzzyState,
    pub weights: Vec<f64>,
    pub target: f64,
}

/// Slice `[start, start+length)` out of the series, then average-pool
/// consecutive groups of `pool` values.
pub fn roi_extract(
    series: &NormalizedSeries,
    start: usize,
    length: usize,
    pool: usize,
) -> Result<FuzzyState> {
    if length == 0 {
        return Err(Error::Parameter("roi length must be at least 1".into()));
    }
    if start + length > series.len() {
        return Err(Error::Range(format!(
            "roi [{start}, {}) does not fit series of length {}",
            start + length,
            series.len()
        )));
    }
    if pool == 0 || length % pool != 0 {
        return Err(Error::Parameter(format!(
            "pool factor {pool} must divide roi length {length}"
        )));
    }
    let slice = &series.values()[start..start + length];
    let pooled: Vec<f64> = slice
        .chunks(pool)
        .map(|chunk| chunk.iter().sum::<f64>() / pool as f64)
        .collect();
    FuzzyState::new(pooled)
}

/// Build every W-day rolling window with its decay weights and
/// `horizon`-day-ahead target. Oldest window first.
pub fn rolling_windows(
    series: &NormalizedSeries,
    w: usize,
    horizon: usize,
    scheme: DecayScheme,
) -> Result<Vec<RollingWindowSample>> {
    if w == 0 {
        return Err(Error::Parameter("window length must be at least 1".into()));
    }
    if horizon == 0 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    if series.len() < w {
        return Err(Error::Input(format!(
            "series length {} is shorter than the window {w}",
            series.len()
        )));
    }
    let weights = scheme.weights(w)?;
    let values = series.values();
    let count = (series.len() + 1).saturating_sub(w + horizon);
    let mut samples = Vec::with_capacity(count);
    for t in (w - 1)..series.len().saturating_sub(horizon) {
        let window = FuzzyState::new(values[t + 1 - w..=t].to_vec())?;
        samples.push(RollingWindowSample {
            window,
            weights: weights.clone(),
            target: values[t + horizon],
        });
    }
    Ok(samples)
}

/// Audit dump: one row per sample, columns `t0..t{W-1},w0..w{W-1},target`.
pub fn write_samples_csv(samples: &[RollingWindowSample], path: &Path) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Input("no samples to write".into()));
    }
    let w = samples[0].window.dim();
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Data {
        path: display.clone(),
        message: e.to_string(),
    })?;
    let mut header: Vec<String> = (0..w).map(|i| format!("t{i}")).collect();
    header.extend((0..w).map(|i| format!("w{i}")));
    header.push("target".into());
    writer.write_record(&header).map_err(|e| Error::Data {
        path: display.clone(),
        message: e.to_string(),
    })?;
    for s in samples {
        let mut row: Vec<String> = s.window.as_slice().iter().map(|v| v.to_string()).collect();
        row.extend(s.weights.iter().map(|v| v.to_string()));
        row.push(s.target.to_string());
        writer.write_record(&row).map_err(|e| Error::Data {
            path: display.clone(),
            message: e.to_string(),
        })?;
    }
    writer.flush().map_err(|e| Error::io(&display, e))?;
    Ok(())
}
