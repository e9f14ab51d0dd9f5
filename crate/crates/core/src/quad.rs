//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! The interval with the largest error estimate is bisected until the total
//! error meets `max(abs_tol, rel_tol·|I|)` or the subdivision budget runs
//! out. Semi-infinite ranges are mapped onto (0, 1].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-10, max_subdivisions: 2000 }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) || !(rel_tol > 0.0) || max_subdivisions == 0 {
            return Err(Error::InvalidParams(
                "quadrature tolerances must be positive and the budget nonzero".into(),
            ));
        }
        Ok(QuadratureSpec { abs_tol, rel_tol, max_subdivisions })
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208745780491,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv = [0.0f64; 21];
    fv[10] = f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        fv[j] = f(center - dx);
        fv[20 - j] = f(center + dx);
    }
    if fv.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence(format!("integrand not finite on [{a}, {b}]")));
    }
    let mut kronrod = WGK[10] * fv[10];
    let mut gauss = 0.0;
    let mut abs_sum = WGK[10] * fv[10].abs();
    for j in 0..10 {
        let pair = fv[j] + fv[20 - j];
        kronrod += WGK[j] * pair;
        abs_sum += WGK[j] * (fv[j].abs() + fv[20 - j].abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fv[10] - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[20 - j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

/// Integrates `f` over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_breaks(f, &[a, b], spec)
}

/// Integrates `f` over [p_0, p_last] with the interior points as initial
/// subdivision (use them for peaks and kinks).
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if points.len() < 2 {
        return Err(Error::InvalidParams("need at least two integration limits".into()));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|p| !p.is_finite()) {
        if points.len() == 2 && points[0] == points[1] {
            return Ok(Estimate { value: 0.0, abs_error: 0.0, evaluations: 0 });
        }
        return Err(Error::InvalidParams(format!("integration limits must increase: {points:?}")));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        let (value, error) = gauss_kronrod(&mut f, w[0], w[1])?;
        evaluations += 21;
        total += value;
        total_err += error;
        heap.push(Piece { a: w[0], b: w[1], value, error });
    }
    let mut pieces = heap.len();
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        if pieces >= spec.max_subdivisions {
            return Err(Error::NonConvergence(format!(
                "error estimate {total_err:e} above tolerance {tol:e} after {pieces} subdivisions"
            )));
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval cannot be split further in floating point.
            return Err(Error::NonConvergence(format!(
                "interval [{}, {}] exhausted machine precision (error {:e})",
                worst.a, worst.b, total_err
            )));
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.a, mid)?;
        let (v2, e2) = gauss_kronrod(&mut f, mid, worst.b)?;
        evaluations += 42;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        pieces += 1;
        // Periodically resum to avoid drift in the running totals.
        if pieces % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let abs_error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Estimate { value, abs_error, evaluations })
}

/// Integrates `f` over [a, ∞) through x = a + scale·(1 − t)/t.
///
/// `scale` should be of the order of the integrand's decay length.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParams(format!("scale = {scale} must be positive")));
    }
    integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = a + scale * (1.0 - t) / t;
            if x.is_infinite() {
                return 0.0;
            }
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (t * t)
            }
        },
        0.0,
        1.0,
        spec,
    )
}
