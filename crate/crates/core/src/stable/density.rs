use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, QuadratureSpec};

/// Positive α-stable law with Laplace transform exp(−t^α).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableDensitySpec {
    pub alpha: f64,
    pub quadrature: QuadratureSpec,
}

impl StableDensitySpec {
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_quadrature(alpha, QuadratureSpec::default())
    }

    pub fn with_quadrature(alpha: f64, quadrature: QuadratureSpec) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        QuadratureSpec::new(quadrature.abs_tol, quadrature.rel_tol, quadrature.max_subdivisions)?;
        Ok(StableDensitySpec { alpha, quadrature })
    }

    /// f_α(x).
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.log_density(x)?.exp())
    }

    /// log f_α(x), accurate in relative terms deep in the left tail.
    ///
    /// Uses Kanter's angular representation
    /// f_α(x) = α/((1−α)π) · x^{−1/(1−α)} ∫_0^π A(u) exp(−A(u) x^{−α/(1−α)}) du.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("stable density needs x > 0, got {x}")));
        }
        if x.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        let alpha = self.alpha;
        let one_minus = 1.0 - alpha;
        let c = (-alpha / one_minus * x.ln()).exp();
        let a0 = kanter_at_zero(alpha);
        // Shift by A(0)·c so the integrand stays O(1) near u = 0.
        let spec = self.quadrature.with_abs_tol(1e-300);
        // A(u)·c ~ 1 at distance sin(απ)·c^{1−α} from u = π.
        let delta = (alpha * PI).sin() * (one_minus * c.ln()).exp();
        let ln_a0 = a0.ln();
        let est = integrate_breaks(
            |v| {
                let d = ln_kanter_ratio(alpha, v);
                if d.is_infinite() {
                    return 0.0;
                }
                (ln_a0 + d - a0 * d.exp_m1() * c).exp()
            },
            &angular_breaks(delta),
            &spec,
        )?;
        if !(est.value > 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok((alpha / (one_minus * PI)).ln() - x.ln() / one_minus + est.value.ln() - a0 * c)
    }
}

/// f_α(x) with default quadrature settings.
pub fn stable_density(alpha: f64, x: f64) -> Result<f64> {
    StableDensitySpec::new(alpha)?.density(x)
}

/// ln(A(π − v)/A(0+)), where A(u) = sin(αu)^{α/(1−α)} sin((1−α)u) / sin(u)^{1/(1−α)}.
///
/// Written through ln(sin(x)/x) so that it stays accurate both near u = 0,
/// where the difference from A(0+) matters in the left tail, and near u = π,
/// where A(u) blows up.
#[inline]
pub(crate) fn ln_kanter_ratio(alpha: f64, v: f64) -> f64 {
    let one_minus = 1.0 - alpha;
    let u = PI - v;
    let ln_sinc_u = if u < 1.0 { ln_sinc(u) } else { v.sin().ln() - u.ln() };
    alpha / one_minus * ln_sinc(alpha * u) + ln_sinc(one_minus * u) - ln_sinc_u / one_minus
}

/// ln(sin(x)/x) for 0 ≤ x < π.
#[inline]
fn ln_sinc(x: f64) -> f64 {
    if x < 1e-3 {
        let x2 = x * x;
        -x2 * (1.0 / 6.0 + x2 * (1.0 / 180.0 + x2 / 2835.0))
    } else {
        (x.sin() / x).ln()
    }
}

/// Breakpoints on v ∈ [0, π] clustering geometrically around `delta`.
pub(crate) fn angular_breaks(delta: f64) -> Vec<f64> {
    let mut points = vec![0.0];
    if delta.is_finite() && delta > 0.0 && delta < 0.5 {
        for k in [-6, -4, -2, -1, 0, 1, 2, 4, 6] {
            let p = delta * 4f64.powi(k);
            if p > 0.0 && p < 0.5 * PI && p > *points.last().unwrap() {
                points.push(p);
            }
        }
    }
    points.push(PI);
    points
}

/// A(0+) = α^{α/(1−α)} (1 − α), the minimum of the Kanter function.
#[inline]
pub(crate) fn kanter_at_zero(alpha: f64) -> f64 {
    alpha.powf(alpha / (1.0 - alpha)) * (1.0 - alpha)
}

/// Closed form of f_{1/2}: x^{−3/2} e^{−1/(4x)} / (2√π).
pub fn levy_density(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    x.powf(-1.5) * (-0.25 / x).exp() / (2.0 * PI.sqrt())
}
