//! Max-product composition, its log-sum-exp smoothing, and the cost.

use crate::error::{Error, Result};
use crate::fdes::{EventMatrix, FuzzyState};

fn check_dims(state: &FuzzyState, event: &EventMatrix, context: &'static str) -> Result<()> {
    if state.dim() != event.dim() {
        return Err(Error::Dimension {
            context,
            expected: event.dim(),
            actual: state.dim(),
        });
    }
    Ok(())
}

/// Exact max-product composition: output component `j` is
/// `max_i(S_i * a_{i,j})`.
///
/// Ties resolve to the lowest index (relevant only to diagnostics that ask
/// which transition won; the value is unaffected).
pub fn compose_exact(state: &FuzzyState, event: &EventMatrix) -> Result<FuzzyState> {
    check_dims(state, event, "compose_exact")?;
    let n = state.dim();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let p = state[i] * event.get(i, j);
            if p > best {
                best = p;
            }
        }
        *o = best;
    }
    Ok(FuzzyState::from_raw(out))
}

/// Smooth composition: output component `j` is
/// `(1/delta) * ln(sum_m exp(delta * S_m * a_{m,j}))`.
///
/// Computed with the shift by the largest product, i.e. as
/// `p_max + ln(sum_m exp(delta * (p_m - p_max))) / delta`. Besides avoiding
/// overflow, this form makes the log-sum-exp sandwich
/// `exact <= smooth <= exact + ln(N)/delta` hold in floating point and not
/// just on paper: the shifted exponents are all <= 0, so the inner sum lies
/// in [1, N] exactly, and the added correction is non-negative and at most
/// `ln(N)/delta`.
pub fn compose_smooth(state: &FuzzyState, event: &EventMatrix, sharpness: f64) -> Result<FuzzyState> {
    check_dims(state, event, "compose_smooth")?;
    if !(sharpness.is_finite() && sharpness > 0.0) {
        return Err(Error::Parameter(format!(
            "sharpness must be a positive finite real, got {sharpness}"
        )));
    }
    let n = state.dim();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut p_max = f64::NEG_INFINITY;
        for i in 0..n {
            let p = state[i] * event.get(i, j);
            if p > p_max {
                p_max = p;
            }
        }
        let mut sum = 0.0;
        for i in 0..n {
            let p = state[i] * event.get(i, j);
            sum += (sharpness * (p - p_max)).exp();
        }
        *o = p_max + sum.ln() / sharpness;
    }
    Ok(FuzzyState::from_raw(out))
}

/// Squared-error cost `½ Σ (qL_n − target_n)²`.
pub fn cost(output: &FuzzyState, target: &FuzzyState) -> Result<f64> {
    if output.dim() != target.dim() {
        return Err(Error::Dimension {
            context: "cost",
            expected: target.dim(),
            actual: output.dim(),
        });
    }
    let mut c = 0.0;
    for (a, b) in output.as_slice().iter().zip(target.as_slice()) {
        let d = a - b;
        c += d * d;
    }
    Ok(0.5 * c)
}
