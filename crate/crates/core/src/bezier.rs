//! Bézier polynomials in Bernstein form over normalized phase `s ∈ [0, 1]`.
//!
//! A row of `M + 1` coefficients defines `h(s) = Σ_j c_j · C(M, j) · s^j · (1 - s)^(M - j)`.

use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn check_phase(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::PhaseDomain(s))
    }
}

/// Sum of `coeffs[j] · B_{j,M}(s)` without domain checks.
fn bernstein_sum(coeffs: &[f64], s: f64) -> f64 {
    let order = coeffs.len() - 1;
    let t = 1.0 - s;
    coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| c * binomial(order, j) * s.powi(j as i32) * t.powi((order - j) as i32))
        .sum()
}

/// Evaluates a Bézier row at phase `s`.
pub fn eval(coeffs: &[f64], s: f64) -> Result<f64> {
    check_phase(s)?;
    if coeffs.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "Bézier row needs at least 2 coefficients, got {}",
            coeffs.len()
        )));
    }
    // Endpoints are returned verbatim so the endpoint property holds bit-for-bit.
    if s == 0.0 {
        return Ok(coeffs[0]);
    }
    if s == 1.0 {
        return Ok(coeffs[coeffs.len() - 1]);
    }
    Ok(bernstein_sum(coeffs, s))
}

/// Coefficients of `dh/ds` as a Bézier row of order `M - 1`.
pub fn hodograph(coeffs: &[f64]) -> Vec<f64> {
    let order = (coeffs.len() - 1) as f64;
    coeffs.windows(2).map(|w| order * (w[1] - w[0])).collect()
}

/// Evaluates a row of any length (a single coefficient is a constant);
/// `s` is assumed to lie in `[0, 1]`.
pub(crate) fn eval_unchecked(coeffs: &[f64], s: f64) -> f64 {
    match coeffs.len() {
        0 => 0.0,
        1 => coeffs[0],
        n if s == 1.0 => coeffs[n - 1],
        _ if s == 0.0 => coeffs[0],
        _ => bernstein_sum(coeffs, s),
    }
}

/// `dh/ds` from the degree-elevated difference row.
pub fn derivative(coeffs: &[f64], s: f64) -> Result<f64> {
    check_phase(s)?;
    let order = coeffs.len() - 1;
    if order == 0 {
        return Ok(0.0);
    }
    let diffs: Vec<f64> = coeffs.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.len() == 1 {
        return Ok(order as f64 * diffs[0]);
    }
    Ok(order as f64 * bernstein_sum(&diffs, s))
}

/// `d²h/ds²`.
pub fn second_derivative(coeffs: &[f64], s: f64) -> Result<f64> {
    check_phase(s)?;
    let order = coeffs.len() - 1;
    if order < 2 {
        return Ok(0.0);
    }
    let diffs: Vec<f64> = coeffs.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let scale = (order * (order - 1)) as f64;
    if diffs.len() == 1 {
        return Ok(scale * diffs[0]);
    }
    Ok(scale * bernstein_sum(&diffs, s))
}

/// Time derivative `(dh/ds) / T` for a step of period `period` seconds.
///
/// `period` must be finite and positive; the standing gait has no time scale.
pub fn rate(coeffs: &[f64], s: f64, period: f64) -> Result<f64> {
    if !period.is_finite() {
        return Err(Error::NoTimeScale);
    }
    if period <= 0.0 {
        return Err(Error::InvalidArgument(format!("period {period} must be positive")));
    }
    Ok(derivative(coeffs, s)? / period)
}
