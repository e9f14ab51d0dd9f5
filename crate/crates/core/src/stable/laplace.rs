use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::density::StableDensitySpec;
use crate::error::{Error, Result};
use crate::quad::integrate_breaks;

/// Largest exponent accepted by the log-space Laplace routines.
const MAX_ORDER: usize = 100_000_000;

/// Quadrature value of I_n(z) = ∫ exp(−n(zy − ln y)) f_α(y) dy next to its
/// leading-order approximation (1/z)^{n+1} f_α(1/z) e^{−n} √(2π/n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceIntegral {
    pub log_value: f64,
    pub log_approx: f64,
}

impl LaplaceIntegral {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    pub fn approx(&self) -> f64 {
        self.log_approx.exp()
    }

    /// I_n(z) / approximation, formed in log space.
    pub fn ratio(&self) -> f64 {
        (self.log_value - self.log_approx).exp()
    }

    pub fn relative_gap(&self) -> f64 {
        (self.ratio() - 1.0).abs()
    }
}

pub fn laplace_integral(alpha: f64, n: usize, z: f64) -> Result<LaplaceIntegral> {
    laplace_integral_with(&StableDensitySpec::new(alpha)?, n, z)
}

pub fn laplace_integral_with(stable: &StableDensitySpec, n: usize, z: f64) -> Result<LaplaceIntegral> {
    if n == 0 {
        return Err(Error::InvalidParams("Laplace integral needs n >= 1".into()));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("Laplace integral needs z > 0, got {z}")));
    }
    // I_n(z) = ∫ y^n e^{−nzy} f_α(y) dy
    let log_value = log_laplace_moment(stable, n, n as f64 * z)?;
    let nf = n as f64;
    let log_approx = -(nf + 1.0) * z.ln() + stable.log_density(1.0 / z)? - nf + 0.5 * (2.0 * PI / nf).ln();
    Ok(LaplaceIntegral { log_value, log_approx })
}

/// log ∫_0^∞ x^n e^{−w x} f_α(x) dx, evaluated in log space.
///
/// The integrand is located on the log axis, rescaled by its maximum and
/// integrated in y = ln x between points where it falls below e^{−60}.
pub fn log_laplace_moment(stable: &StableDensitySpec, n: usize, w: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::Overflow(format!("order n = {n} exceeds {MAX_ORDER}")));
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("Laplace moment needs w > 0, got {w}")));
    }
    let nf = n as f64;
    // log of the integrand in y = ln x, including the Jacobian e^y.
    let log_h = |y: f64| -> f64 {
        let x = y.exp();
        let lf = stable.log_density(x).unwrap_or(f64::NAN);
        (nf + 1.0) * y - w * x + lf
    };
    // Maximize on a coarse bracket around the peak of x^{n+1} e^{−wx}, then
    // golden-section refine.
    let center = ((nf + 1.0) / w).ln();
    let mut best_y = center;
    let mut best = log_h(center);
    if best.is_nan() {
        return Err(Error::NonConvergence("stable density failed at Laplace peak".into()));
    }
    for k in 1..=40 {
        for &dir in &[-1.0, 1.0] {
            let y = center + dir * 0.5 * k as f64;
            let v = log_h(y);
            if v > best {
                best = v;
                best_y = y;
            }
        }
    }
    let (mut a, mut b) = (best_y - 0.5, best_y + 0.5);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (log_h(c), log_h(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = log_h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = log_h(d);
        }
    }
    let y_peak = 0.5 * (a + b);
    let peak = log_h(y_peak).max(best);
    if !peak.is_finite() {
        return Err(Error::NonConvergence(format!("Laplace integrand peak not finite (n={n}, w={w})")));
    }
    let width = 1.0 / (nf + 1.0).sqrt();
    let cutoff = peak - 60.0;
    let mut lo = y_peak;
    let mut step = width;
    loop {
        lo -= step;
        step *= 1.5;
        if log_h(lo) < cutoff || lo < y_peak - 800.0 {
            break;
        }
    }
    let mut hi = y_peak;
    step = width;
    loop {
        hi += step;
        step *= 1.5;
        if log_h(hi) < cutoff || hi > y_peak + 800.0 {
            break;
        }
    }
    let mut points = vec![lo];
    for k in [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0] {
        let p = y_peak + k * width;
        if p > lo && p < hi {
            points.push(p);
        }
    }
    points.push(hi);
    // Each density value carries its own quadrature error at rel_tol, so the
    // outer integral can only be asked for a somewhat looser target.
    let spec = stable.quadrature.with_abs_tol(1e-300).with_rel_tol(10.0 * stable.quadrature.rel_tol);
    let est = integrate_breaks(|y| (log_h(y) - peak).exp(), &points, &spec)?;
    if !(est.value > 0.0) {
        return Err(Error::NonConvergence("Laplace integral vanished".into()));
    }
    Ok(peak + est.value.ln())
}
