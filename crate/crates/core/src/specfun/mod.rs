//! Log-space factorial utilities and generalized factorial coefficient
//! tables.

pub mod exact;
mod gfc;

pub use gfc::{gfc_row, gfc_row_cached, gfc_table, table_limit, GfcTable, DEFAULT_TABLE_LIMIT, TABLE_LIMIT_ENV};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use statrs::function::gamma::ln_gamma;

/// The pair (α, θ) of a two-parameter Poisson-Dirichlet model, restricted to
/// 0 < α < 1 and θ > −α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    theta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !theta.is_finite() || theta <= -alpha {
            return Err(Error::InvalidParams(format!(
                "theta = {theta} must be finite and exceed -alpha = {}",
                -alpha
            )));
        }
        Ok(ModelParams { alpha, theta })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Same discount, concentration shifted by `delta` (e.g. θ + n for the
    /// posterior-updated model).
    pub fn with_theta_shift(&self, delta: f64) -> Result<Self> {
        ModelParams::new(self.alpha, self.theta + delta)
    }
}

/// log Π_{i=0}^{n−1} (x + i·a) for a ≥ 0.
///
/// Fails with a domain error when any factor is non-positive.
pub fn log_rising_factorial(x: f64, n: usize, a: f64) -> Result<f64> {
    if n == 0 {
        return Ok(0.0);
    }
    if !(a >= 0.0) || !x.is_finite() || !a.is_finite() {
        return Err(Error::Domain(format!("rising factorial needs finite x and a >= 0 (x={x}, a={a})")));
    }
    if x <= 0.0 {
        return Err(Error::Domain(format!("rising factorial factor x = {x} is not positive")));
    }
    if a == 0.0 {
        return Ok(n as f64 * x.ln());
    }
    // Direct summation is more accurate than a difference of large log-gammas
    // for short products.
    if n <= 64 {
        return Ok((0..n).map(|i| (x + i as f64 * a).ln()).sum());
    }
    let ratio = x / a;
    Ok(n as f64 * a.ln() + ln_gamma(ratio + n as f64) - ln_gamma(ratio))
}

/// log(k!) via the log-gamma function.
#[inline]
pub fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Stirling numbers of the second kind S(n, k), 0 ≤ k ≤ n ≤ 30.
pub fn stirling2(n: usize, k: usize) -> Result<u128> {
    const MAX_N: usize = 30;
    if n > MAX_N {
        return Err(Error::Overflow(format!("stirling2 supports n <= {MAX_N}, got {n}")));
    }
    if k > n {
        return Ok(0);
    }
    let mut row = vec![0u128; n + 1];
    row[0] = 1;
    for m in 1..=n {
        for j in (1..=m).rev() {
            row[j] = j as u128 * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    Ok(row[k])
}

/// log(e^a + e^b), tolerant of −∞ arguments.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// log Σ exp(x_i) with a single max subtraction.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// log B(a, b).
#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}
