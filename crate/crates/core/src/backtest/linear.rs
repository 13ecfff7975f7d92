//! The weighted-linear baseline: least squares of the target on
//! decay-weighted window components.
//!
//! Each sample's features are `x_p = weight_p * window_p` plus an
//! intercept, so older days enter the fit shrunk by their decay weight.
//! The normal equations are solved directly (the system is only
//! `(W+1) x (W+1)`); a singular system falls back to the martingale rule
//! and records a warning instead of failing the backtest.

use crate::error::{Error, Result};
use crate::market::RollingWindowSample;

/// A fitted linear predictor, or the martingale fallback when the fit was
/// singular.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLinear {
    weights: Vec<f64>,
    coeffs: Vec<f64>,
    intercept: f64,
    fallback: bool,
}

impl WeightedLinear {
    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// Predict the next value for a query window (oldest first). Window
    /// values may sit outside `[0,1]`: evaluation segments normalized with
    /// a frozen scaler routinely overshoot, and a linear map extrapolates.
    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.weights.len() {
            return Err(Error::Dimension {
                context: "WeightedLinear::predict",
                expected: self.weights.len(),
                actual: window.len(),
            });
        }
        if self.fallback {
            return super::predict_martingale(window);
        }
        let mut y = self.intercept;
        for ((c, w), v) in self.coeffs.iter().zip(&self.weights).zip(window) {
            y += c * w * v;
        }
        Ok(y)
    }
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting. `None`
/// means a pivot fell below the relative tolerance: the system is singular
/// for this purpose.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let tol = scale * 1e-12;
    for c in 0..n {
        let (p, mag) = (c..n)
            .map(|r| (r, a[r][c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("nonempty pivot range");
        if mag < tol {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f == 0.0 {
                continue;
            }
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let mut s = b[c];
        for k in c + 1..n {
            s -= a[c][k] * x[k];
        }
        x[c] = s / a[c][c];
    }
    Some(x)
}

/// Fit the decay-weighted linear model on a sample history. Needs at least
/// `W + 1` samples sharing one window length and one weight vector. A
/// singular design yields the martingale fallback with
/// [`WeightedLinear::is_fallback`] set; callers surface the warning.
pub fn fit_weighted_linear(samples: &[RollingWindowSample]) -> Result<WeightedLinear> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Input("weighted-linear fit needs samples".into()))?;
    let w = first.window.dim();
    if samples.len() < w + 1 {
        return Err(Error::Input(format!(
            "weighted-linear fit needs at least {} samples for window {w}, got {}",
            w + 1,
            samples.len()
        )));
    }
    for s in samples {
        if s.window.dim() != w || s.weights.len() != w {
            return Err(Error::Dimension {
                context: "fit_weighted_linear",
                expected: w,
                actual: s.window.dim().min(s.weights.len()),
            });
        }
        if s.weights != first.weights {
            return Err(Error::Input(
                "weighted-linear fit needs one decay scheme across samples".into(),
            ));
        }
        if !s.target.is_finite() || s.window.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "weighted-linear fit given non-finite sample".into(),
            ));
        }
    }

    // Normal equations over features [1, w_0*v_0, ..., w_{W-1}*v_{W-1}].
    let d = w + 1;
    let mut gram = vec![vec![0.0; d]; d];
    let mut rhs = vec![0.0; d];
    let mut feat = vec![0.0; d];
    for s in samples {
        feat[0] = 1.0;
        for (p, (weight, v)) in s.weights.iter().zip(s.window.as_slice()).enumerate() {
            feat[p + 1] = weight * v;
        }
        for i in 0..d {
            for j in 0..d {
                gram[i][j] += feat[i] * feat[j];
            }
            rhs[i] += feat[i] * s.target;
        }
    }

    match solve(gram, rhs) {
        Some(beta) => Ok(WeightedLinear {
            weights: first.weights.clone(),
            intercept: beta[0],
            coeffs: beta[1..].to_vec(),
            fallback: false,
        }),
        None => Ok(WeightedLinear {
            weights: first.weights.clone(),
            intercept: 0.0,
            coeffs: vec![0.0; w],
            fallback: true,
        }),
    }
}

/// One-shot fit-and-predict, the convenience form of the baseline.
pub fn predict_weighted_linear(samples: &[RollingWindowSample], window: &[f64]) -> Result<f64> {
    fit_weighted_linear(samples)?.predict(window)
}
