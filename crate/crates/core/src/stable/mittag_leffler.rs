use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::{gamma_lr, gamma_ur};

use super::density::{angular_breaks, kanter_at_zero, ln_kanter_ratio, StableDensitySpec};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_breaks, integrate_to_infinity, QuadratureSpec};
use crate::specfun::{ln_gamma, ModelParams};

/// Interpolation error target for the cached CDF grid.
const GRID_TOL: f64 = 1e-10;
/// Tail mass left outside the cached grid on either side.
const GRID_TAIL: f64 = 1e-15;

/// Law of Pitman's α-diversity S_{α,θ} (scaled Mittag-Leffler).
///
/// Density, CDF and moments are evaluated by quadrature. The CDF is backed by
/// a lazily built monotone Hermite grid that is shared read-only once built.
#[derive(Debug)]
pub struct MittagLefflerLaw {
    params: ModelParams,
    stable: StableDensitySpec,
    grid: OnceLock<CdfGrid>,
}

impl Clone for MittagLefflerLaw {
    fn clone(&self) -> Self {
        let grid = OnceLock::new();
        if let Some(g) = self.grid.get() {
            let _ = grid.set(g.clone());
        }
        MittagLefflerLaw { params: self.params, stable: self.stable, grid }
    }
}

impl MittagLefflerLaw {
    pub fn new(params: ModelParams) -> Self {
        Self::with_quadrature(params, QuadratureSpec::default())
    }

    pub fn with_quadrature(params: ModelParams, quadrature: QuadratureSpec) -> Self {
        let stable = StableDensitySpec { alpha: params.alpha(), quadrature };
        MittagLefflerLaw { params, stable, grid: OnceLock::new() }
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    fn quadrature(&self) -> &QuadratureSpec {
        &self.stable.quadrature
    }

    /// log of Γ(θ+1) / (α Γ(θ/α + 1)).
    fn ln_norm(&self) -> f64 {
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        ln_gamma(theta + 1.0) - alpha.ln() - ln_gamma(theta / alpha + 1.0)
    }

    /// Density Γ(θ+1)/(αΓ(θ/α+1)) · s^{(θ−1)/α − 1} f_α(s^{−1/α}).
    pub fn density(&self, s: f64) -> Result<f64> {
        Ok(self.log_density(s)?.exp())
    }

    pub fn log_density(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain(format!("Mittag-Leffler density needs s > 0, got {s}")));
        }
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        let y = (-s.ln() / alpha).exp();
        if y == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.ln_norm() + ((theta - 1.0) / alpha - 1.0) * s.ln() + self.stable.log_density(y)?)
    }

    /// exponent κ = θ(1−α)/α of the angular CDF representation
    fn kappa(&self) -> f64 {
        self.params.theta() * (1.0 - self.params.alpha()) / self.params.alpha()
    }

    /// Angular representation of the CDF (or survival function).
    ///
    /// Writing S = X^{−α} with X drawn from f_α tilted by x^{−θ}, and
    /// X = (A(U)/E)^{(1−α)/α} with U ~ U(0, π), E ~ Exp(1), the inner
    /// integral over E is an incomplete gamma function:
    /// F(x) = Γ(θ+1)Γ(κ+1)/(πΓ(θ/α+1)) ∫_0^π A(u)^{−κ} P(κ+1, A(u) x^{1/(1−α)}) du.
    fn angular(&self, x: f64, upper: bool) -> Result<f64> {
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        let kappa = self.kappa();
        let shape = kappa + 1.0;
        let a0 = kanter_at_zero(alpha);
        let ln_a0 = a0.ln();
        let ln_c = ln_gamma(theta + 1.0) + ln_gamma(shape) - ln_gamma(theta / alpha + 1.0) - PI.ln()
            - kappa * ln_a0;
        let xb = (x.ln() / (1.0 - alpha)).exp();
        let spec = self.quadrature().with_abs_tol(1e-300);
        // P(κ+1, ·) switches on where A(u)·x^{1/(1−α)} ~ κ+1, close to u = π
        // for small x.
        let delta = (alpha * PI).sin() * x * shape.powf(alpha - 1.0);
        let est = integrate_breaks(
            |v| {
                let d = ln_kanter_ratio(alpha, v);
                if d.is_infinite() {
                    return if upper || kappa > 0.0 { 0.0 } else { ln_c.exp() };
                }
                let w = a0 * d.exp() * xb;
                let inner = if w == 0.0 {
                    if upper {
                        1.0
                    } else {
                        0.0
                    }
                } else if w.is_infinite() {
                    if upper {
                        0.0
                    } else {
                        1.0
                    }
                } else if upper {
                    gamma_ur(shape, w)
                } else {
                    gamma_lr(shape, w)
                };
                (ln_c - kappa * d).exp() * inner
            },
            &angular_breaks(delta),
            &spec,
        )?;
        Ok(est.value.clamp(0.0, 1.0))
    }

    /// P[S ≤ x] evaluated directly (no grid).
    pub fn cdf_direct(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("CDF argument is NaN".into()));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        self.angular(x, false)
    }

    /// P[S > x] evaluated directly.
    pub fn sf_direct(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("survival argument is NaN".into()));
        }
        if x <= 0.0 {
            return Ok(1.0);
        }
        if x.is_infinite() {
            return Ok(0.0);
        }
        self.angular(x, true)
    }

    /// Builds the interpolation grid if it does not exist yet.
    pub fn grid(&self) -> Result<&CdfGrid> {
        if let Some(g) = self.grid.get() {
            return Ok(g);
        }
        let built = CdfGrid::build(self)?;
        Ok(self.grid.get_or_init(|| built))
    }

    /// P[S ≤ x] from the cached grid. Outside the grid the tails hold less
    /// than 1e−15 of mass and 0 or 1 is returned.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("CDF argument is NaN".into()));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        if x.is_infinite() {
            return Ok(1.0);
        }
        let grid = self.grid()?;
        let t = x.ln();
        match grid.eval(t) {
            Some(v) => Ok(v),
            // Past the bracket the remaining tail mass is below GRID_TAIL.
            None if t > grid.t_max() => Ok(1.0),
            None if grid.low_tail_certified => Ok(0.0),
            None => self.cdf_direct(x),
        }
    }

    /// Smallest x with |F(x) − p| ≤ 1e−10, refined against the direct CDF.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level p = {p} must lie in (0, 1)")));
        }
        let mut x = self.quantile_grid(p)?;
        // Safeguarded Newton on the direct CDF.
        let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
        for _ in 0..60 {
            let f = if p < 0.5 { self.cdf_direct(x)? - p } else { (1.0 - p) - self.sf_direct(x)? };
            if f.abs() <= 1e-12 {
                return Ok(x);
            }
            if f > 0.0 {
                hi = hi.min(x);
            } else {
                lo = lo.max(x);
            }
            let d = self.density(x)?;
            let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * x.max(lo) };
            }
            if (next - x).abs() <= 1e-15 * x {
                return Ok(next);
            }
            x = next;
        }
        let residual = (self.cdf_direct(x)? - p).abs();
        if residual <= 1e-10 {
            Ok(x)
        } else {
            Err(Error::NonConvergence(format!("quantile at p={p} stalled with residual {residual:e}")))
        }
    }

    /// Quantile by inverting the cached grid only (≈1e−10 in probability).
    pub fn quantile_grid(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level p = {p} must lie in (0, 1)")));
        }
        let grid = self.grid()?;
        Ok(grid.invert(p).exp())
    }

    /// E[S] by quadrature of the survival function.
    pub fn mean(&self) -> Result<f64> {
        let grid = self.grid()?;
        let median = grid.invert(0.5).exp();
        let spec = self.quadrature().with_abs_tol(1e-14);
        let head = integrate(|x| self.sf_direct(x).unwrap_or(f64::NAN), 0.0, median, &spec)?;
        let tail = integrate_to_infinity(|x| self.sf_direct(x).unwrap_or(f64::NAN), median, median, &spec)?;
        Ok(head.value + tail.value)
    }

    /// E[1/S] by quadrature of s^{−1} f(s).
    ///
    /// The moment is finite exactly when θ > 0; near the origin the density
    /// behaves like s^{θ/α}, so the head is integrated after s = v^{α/θ}.
    pub fn neg_moment(&self) -> Result<f64> {
        self.neg_moment_with(self.quadrature())
    }

    pub fn neg_moment_with(&self, spec: &QuadratureSpec) -> Result<f64> {
        let (alpha, theta) = (self.params.alpha(), self.params.theta());
        if theta <= 0.0 {
            return Err(Error::Domain(format!("E[1/S] diverges for theta = {theta} <= 0")));
        }
        let q = alpha / theta;
        let spec = spec.with_abs_tol(1e-14);
        let head = integrate(
            |v: f64| {
                if v <= 0.0 {
                    return 0.0;
                }
                let s = v.powf(q);
                if s == 0.0 {
                    return 0.0;
                }
                q / v * self.density(s).unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            &spec,
        )?;
        let tail = integrate_to_infinity(|s| self.density(s).unwrap_or(f64::NAN) / s, 1.0, 1.0, &spec)?;
        Ok(head.value + tail.value)
    }
}

/// Cubic Hermite interpolant of F in t = ln x with Fritsch–Carlson limited
/// slopes, refined until midpoint errors are below `GRID_TOL`.
#[derive(Debug, Clone)]
pub struct CdfGrid {
    t: Vec<f64>,
    f: Vec<f64>,
    d: Vec<f64>,
    /// Whether F at the first node is below `GRID_TAIL`.
    low_tail_certified: bool,
}

impl CdfGrid {
    fn build(law: &MittagLefflerLaw) -> Result<Self> {
        let node = |t: f64| -> Result<(f64, f64)> {
            let x = t.exp();
            let f = law.cdf_direct(x)?;
            let d = x * law.density(x)?;
            Ok((f, d))
        };
        // Bracket the support so that the tails outside carry < GRID_TAIL.
        let mut t_lo: f64 = 0.0;
        let mut low_tail_certified = true;
        while law.cdf_direct(t_lo.exp())? > GRID_TAIL {
            t_lo -= 1.0;
            if t_lo < -700.0 {
                low_tail_certified = false;
                break;
            }
        }
        let mut t_hi: f64 = 0.0;
        while law.sf_direct(t_hi.exp())? > GRID_TAIL {
            t_hi += 0.5;
            if t_hi > 700.0 {
                return Err(Error::NonConvergence("CDF grid upper bracket not found".into()));
            }
        }
        let initial = 32;
        let mut ts: Vec<f64> =
            (0..=initial).map(|i| t_lo + (t_hi - t_lo) * i as f64 / initial as f64).collect();
        let mut vals: Vec<(f64, f64)> = ts.iter().map(|&t| node(t)).collect::<Result<_>>()?;
        for _ in 0..40 {
            let mut next_t = Vec::with_capacity(ts.len() * 2);
            let mut next_v = Vec::with_capacity(ts.len() * 2);
            let mut refined = false;
            let slopes = limited_slopes(&ts, &vals);
            for i in 0..ts.len() - 1 {
                next_t.push(ts[i]);
                next_v.push(vals[i]);
                let tm = 0.5 * (ts[i] + ts[i + 1]);
                let approx = hermite(ts[i], ts[i + 1], vals[i].0, vals[i + 1].0, slopes[i], slopes[i + 1], tm);
                let exact = node(tm)?;
                if (approx - exact.0).abs() > GRID_TOL {
                    next_t.push(tm);
                    next_v.push(exact);
                    refined = true;
                }
            }
            next_t.push(*ts.last().unwrap());
            next_v.push(*vals.last().unwrap());
            ts = next_t;
            vals = next_v;
            if !refined {
                break;
            }
        }
        // Enforce monotone node values against rounding.
        let mut f: Vec<f64> = vals.iter().map(|v| v.0).collect();
        for i in 1..f.len() {
            if f[i] < f[i - 1] {
                f[i] = f[i - 1];
            }
        }
        let tmp: Vec<(f64, f64)> = f.iter().zip(&vals).map(|(&fv, v)| (fv, v.1)).collect();
        let d = limited_slopes(&ts, &tmp);
        Ok(CdfGrid { t: ts, f, d, low_tail_certified })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    /// Largest ln x covered by the grid.
    pub fn t_max(&self) -> f64 {
        *self.t.last().expect("grid has nodes")
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Interpolated F at t = ln x; `None` outside the grid.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let n = self.t.len();
        if t < self.t[0] || t > self.t[n - 1] {
            return None;
        }
        let i = match self.t.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        Some(hermite(self.t[i], self.t[i + 1], self.f[i], self.f[i + 1], self.d[i], self.d[i + 1], t).clamp(0.0, 1.0))
    }

    /// t = ln x with interpolated F(x) = p (clamped to the grid range).
    pub fn invert(&self, p: f64) -> f64 {
        let n = self.t.len();
        if p <= self.f[0] {
            return self.t[0];
        }
        if p >= self.f[n - 1] {
            return self.t[n - 1];
        }
        let i = self.f.partition_point(|&v| v <= p).saturating_sub(1).min(n - 2);
        let (mut lo, mut hi) = (self.t[i], self.t[i + 1]);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let v = hermite(self.t[i], self.t[i + 1], self.f[i], self.f[i + 1], self.d[i], self.d[i + 1], mid);
            if v < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

fn limited_slopes(t: &[f64], vals: &[(f64, f64)]) -> Vec<f64> {
    let mut d: Vec<f64> = vals.iter().map(|v| v.1.max(0.0)).collect();
    for i in 0..t.len() - 1 {
        let delta = (vals[i + 1].0 - vals[i].0) / (t[i + 1] - t[i]);
        if delta <= 0.0 {
            d[i] = 0.0;
            d[i + 1] = 0.0;
            continue;
        }
        let a = d[i] / delta;
        let b = d[i + 1] / delta;
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            d[i] = tau * a * delta;
            d[i + 1] = tau * b * delta;
        }
    }
    d
}

#[inline]
fn hermite(t0: f64, t1: f64, f0: f64, f1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
}

/// Density of S_{α,θ} at `s` (default quadrature).
pub fn ml_density(params: ModelParams, s: f64) -> Result<f64> {
    MittagLefflerLaw::new(params).density(s)
}

/// P[S_{α,θ} ≤ x], direct evaluation.
pub fn ml_cdf(params: ModelParams, x: f64) -> Result<f64> {
    MittagLefflerLaw::new(params).cdf_direct(x)
}

pub fn ml_quantile(params: ModelParams, p: f64) -> Result<f64> {
    MittagLefflerLaw::new(params).quantile(p)
}

/// E[1/S_{α,θ}] by quadrature; an error when θ ≤ 0 (divergent).
pub fn ml_neg_moment(params: ModelParams) -> Result<f64> {
    MittagLefflerLaw::new(params).neg_moment()
}

/// E[S_{α,θ}] = (θ/α + 1) Γ(θ+1) / Γ(θ+α+1), from the negative moments of f_α.
pub fn ml_mean_closed_form(params: ModelParams) -> f64 {
    let (alpha, theta) = (params.alpha(), params.theta());
    ((theta / alpha + 1.0).ln() + ln_gamma(theta + 1.0) - ln_gamma(theta + alpha + 1.0)).exp()
}
