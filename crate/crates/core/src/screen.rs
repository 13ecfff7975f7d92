//! Correlation screening of ticker pairs with permutation significance
//! tests.

use crate::error::{Error, Result};
use crate::market::PriceSeries;
use crate::seeds::{derive_seed, rng_from_seed};
use rand::seq::SliceRandom;
use std::collections::BTreeSet;
use std::path::Path;

/// Outcome for one unordered ticker pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub ticker_a: String,
    pub ticker_b: String,
    pub r: f64,
    pub p: f64,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct ScreenConfig {
    /// Select a pair only if |r| exceeds this.
    pub r_threshold: f64,
    /// ... and its permutation p-value is below this.
    pub alpha: f64,
    /// Permutation count M.
    pub permutations: usize,
    pub seed: u64,
}

impl Default for ScreenConfig {
    fn default() -> Self {
        ScreenConfig {
            r_threshold: 0.95,
            alpha: 0.05,
            permutations: 10_000,
            seed: 0,
        }
    }
}

/// Screening results plus warnings for pairs that had to be skipped
/// (empty date overlap, constant aligned series).
#[derive(Debug, Clone)]
pub struct ScreenOutcome {
    pub results: Vec<PairResult>,
    pub warnings: Vec<String>,
}

fn centered(series: &[f64]) -> Vec<f64> {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    series.iter().map(|x| x - mean).collect()
}

/// Pearson correlation coefficient.
pub fn pearson_corr(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            context: "pearson_corr",
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::Input(format!(
            "need at least 3 points for correlation, got {}",
            x.len()
        )));
    }
    let dx = centered(x);
    let dy = centered(y);
    let sxx: f64 = dx.iter().map(|v| v * v).sum();
    let syy: f64 = dy.iter().map(|v| v * v).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateInput(
            "constant series has no correlation".into(),
        ));
    }
    let sxy: f64 = dx.iter().zip(&dy).map(|(a, b)| a * b).sum();
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided permutation test on |r|: shuffle `y` M times with a seeded
/// generator and report the add-one estimate
/// `p = (1 + #{|r_perm| >= |r_obs|}) / (M + 1)`, never below `1/(M+1)`.
pub fn permutation_pvalue(x: &[f64], y: &[f64], m: usize, seed: u64) -> Result<f64> {
    if m < 100 {
        return Err(Error::Parameter(format!(
            "permutation count must be at least 100, got {m}"
        )));
    }
    let r_obs = pearson_corr(x, y)?.abs();
    let dx = centered(x);
    let dy = centered(y);
    let sxx: f64 = dx.iter().map(|v| v * v).sum();
    let syy: f64 = dy.iter().map(|v| v * v).sum();
    let denom = (sxx * syy).sqrt();
    let mut rng = rng_from_seed(seed);
    let mut shuffled = dy;
    let mut beats = 0usize;
    for _ in 0..m {
        shuffled.shuffle(&mut rng);
        let sxy: f64 = dx.iter().zip(&shuffled).map(|(a, b)| a * b).sum();
        if (sxy / denom).abs() >= r_obs {
            beats += 1;
        }
    }
    Ok((1 + beats) as f64 / (m + 1) as f64)
}

/// Evaluate every unordered pair in the universe: align the two series on
/// their common dates, correlate, test significance, and flag selection by
/// `|r| > r_threshold` and `p < alpha`. Results sorted by |r| descending
/// (ties by pair name); per-pair seeds are derived from the sorted ticker
/// names, so input order never matters.
pub fn screen_universe(universe: &[PriceSeries], config: &ScreenConfig) -> Result<ScreenOutcome> {
    if universe.len() < 2 {
        return Err(Error::Input(format!(
            "screening needs at least 2 tickers, got {}",
            universe.len()
        )));
    }
    let mut names = BTreeSet::new();
    for s in universe {
        if !names.insert(s.ticker().to_string()) {
            return Err(Error::Input(format!(
                "duplicate ticker {} in universe",
                s.ticker()
            )));
        }
    }

    let mut results = Vec::new();
    let mut warnings = Vec::new();
    for (idx_a, a) in universe.iter().enumerate() {
        for b in &universe[idx_a + 1..] {
            // Canonical pair naming: lexicographically smaller ticker first.
            let (first, second) = if a.ticker() <= b.ticker() { (a, b) } else { (b, a) };
            let label = format!("{}:{}", first.ticker(), second.ticker());
            let (xs, ys) = align_on_dates(first, second);
            if xs.len() < 3 {
                warnings.push(format!(
                    "pair {label} skipped: only {} overlapping dates",
                    xs.len()
                ));
                continue;
            }
            let pair_seed = derive_seed(config.seed, &label);
            let r = match pearson_corr(&xs, &ys) {
                Ok(r) => r,
                Err(Error::DegenerateInput(_)) => {
                    warnings.push(format!("pair {label} skipped: constant aligned series"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let p = permutation_pvalue(&xs, &ys, config.permutations, pair_seed)?;
            results.push(PairResult {
                ticker_a: first.ticker().to_string(),
                ticker_b: second.ticker().to_string(),
                r,
                p,
                selected: r.abs() > config.r_threshold && p < config.alpha,
            });
        }
    }
    results.sort_by(|u, v| {
        v.r.abs()
            .partial_cmp(&u.r.abs())
            .expect("correlations are finite")
            .then_with(|| (u.ticker_a.as_str(), u.ticker_b.as_str()).cmp(&(v.ticker_a.as_str(), v.ticker_b.as_str())))
    });
    Ok(ScreenOutcome { results, warnings })
}

fn align_on_dates(a: &PriceSeries, b: &PriceSeries) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a.dates()[i].cmp(&b.dates()[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                xs.push(a.closes()[i]);
                ys.push(b.closes()[j]);
                i += 1;
                j += 1;
            }
        }
    }
    (xs, ys)
}

/// Emit `ticker_a,ticker_b,r,p,selected` rows.
pub fn write_pairs_csv(results: &[PairResult], path: &Path) -> Result<()> {
    let display = path.display().to_string();
    let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Data {
        path: display.clone(),
        message: e.to_string(),
    })?;
    writer
        .write_record(["ticker_a", "ticker_b", "r", "p", "selected"])
        .map_err(|e| Error::Data {
            path: display.clone(),
            message: e.to_string(),
        })?;
    for r in results {
        writer
            .write_record([
                r.ticker_a.as_str(),
                r.ticker_b.as_str(),
                &r.r.to_string(),
                &r.p.to_string(),
                &r.selected.to_string(),
            ])
            .map_err(|e| Error::Data {
                path: display.clone(),
                message: e.to_string(),
            })?;
    }
    writer.flush().map_err(|e| Error::io(&display, e))?;
    Ok(())
}
