use std::collections::HashMap;

use super::{LogPmf, Partition, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, QuadratureSpec};
use crate::specfun::{gfc_row_cached, ln_factorial, ln_gamma, ModelParams};
use crate::stable::{log_laplace_moment, StableDensitySpec};

/// Running sums L[k] = log [θ]_(k,α) / [θ]_(1,α) = log Π_{i=1}^{k−1} (θ + iα)
/// for k = 1..=k_max. Dividing out the i = 0 factor keeps every term
/// positive for −α < θ ≤ 0.
fn log_rising_from_second(theta: f64, a: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max);
    let mut acc = 0.0;
    for k in 1..=k_max {
        if k > 1 {
            acc += (theta + (k - 1) as f64 * a).ln();
        }
        out.push(acc);
    }
    out
}

/// P[K_n = k] = ([θ]_(k,α)/[θ]_(n,1)) · 𝒞(n,k;α)/α^k on {1..n}.
///
/// The weights are checked to sum to one within 1e−10 before the residual
/// rounding is removed.
pub fn pmf_blocks(params: ModelParams, n: usize) -> Result<LogPmf> {
    if n == 0 {
        return Err(Error::InvalidParams("pmf_blocks needs n >= 1".into()));
    }
    if n == 1 {
        return Ok(LogPmf::point_mass(1));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let row = gfc_row_cached(alpha, n, 0.0)?;
    let numer = log_rising_from_second(theta, alpha, n);
    let denom = log_rising_from_second(theta, 1.0, n)[n - 1];
    let ln_alpha = alpha.ln();
    let weights = (1..=n).map(|k| numer[k - 1] - denom + row[k] - k as f64 * ln_alpha).collect();
    LogPmf::from_checked_log_weights(1, weights, NORMALIZATION_TOL)
}

/// log P[M_n = (m_1, …, m_n)] from the Ewens-Pitman sampling formula.
pub fn pmf_esf(params: ModelParams, partition: &Partition) -> Result<f64> {
    let (alpha, theta) = (params.alpha(), params.theta());
    let n = partition.n();
    let j = partition.num_blocks();
    let numer = log_rising_from_second(theta, alpha, j)[j - 1];
    let denom = log_rising_from_second(theta, 1.0, n)[n - 1];
    let ln_gamma_one_minus = ln_gamma(1.0 - alpha);
    let mut value = ln_factorial(n) + numer - denom;
    for (i, &m) in partition.multiplicities().iter().enumerate() {
        if m == 0 {
            continue;
        }
        let size = i + 1;
        // (1 − α)_(size−1) = Γ(size − α)/Γ(1 − α)
        let block = ln_gamma(size as f64 - alpha) - ln_gamma_one_minus - ln_factorial(size);
        value += m as f64 * block - ln_factorial(m);
    }
    Ok(value)
}

/// ρ({k}; α, n, z) = 𝒞(n,k;α) z^k / Σ_j 𝒞(n,j;α) z^j on {1..n}.
pub fn pmf_rho(alpha: f64, n: usize, z: f64) -> Result<LogPmf> {
    if n == 0 {
        return Err(Error::InvalidParams("pmf_rho needs n >= 1".into()));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("pmf_rho needs z > 0, got {z}")));
    }
    let row = gfc_row_cached(alpha, n, 0.0)?;
    let ln_z = z.ln();
    let weights = (1..=n).map(|k| row[k] + k as f64 * ln_z).collect();
    LogPmf::from_log_weights(1, weights)
}

/// The shifted Poisson law e^{−z} z^{k−1}/(k−1)! restricted to {1..k_max}
/// and renormalized there (the omitted tail mass is P[Poisson(z) ≥ k_max]).
pub fn pmf_rho_limit(z: f64, k_max: usize) -> Result<LogPmf> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("pmf_rho_limit needs z > 0, got {z}")));
    }
    if k_max == 0 {
        return Err(Error::InvalidParams("pmf_rho_limit needs k_max >= 1".into()));
    }
    let ln_z = z.ln();
    let weights = (1..=k_max).map(|k| -z + (k - 1) as f64 * ln_z - ln_factorial(k - 1)).collect();
    LogPmf::from_log_weights(1, weights)
}

/// log f(z; α, θ, n), the density of S_{α,θ}·G_{θ+n,1}^α:
///
/// f(z) = Γ(θ+1)/(αΓ(θ/α+1)Γ(θ+n)) · z^{(θ+n)/α−1} ∫ x^n e^{−x z^{1/α}} f_α(x) dx.
///
/// For θ > 0 the constant equals 1/(Γ(θ/α)[θ]_(n,1)); the form used here
/// also covers −α < θ ≤ 0.
pub fn log_mixing_density(params: ModelParams, n: usize, z: f64) -> Result<f64> {
    let stable = StableDensitySpec::new(params.alpha())?;
    log_mixing_density_with(&stable, params, n, z)
}

/// f(z; α, θ, n); see [`log_mixing_density`].
pub fn mixing_density(params: ModelParams, n: usize, z: f64) -> Result<f64> {
    Ok(log_mixing_density(params, n, z)?.exp())
}

fn log_mixing_density_with(stable: &StableDensitySpec, params: ModelParams, n: usize, z: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParams("mixing density needs n >= 1".into()));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("mixing density needs z > 0, got {z}")));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let nf = n as f64;
    let ln_const = ln_gamma(theta + 1.0) - alpha.ln() - ln_gamma(theta / alpha + 1.0) - ln_gamma(theta + nf);
    let ln_z = z.ln();
    let w = (ln_z / alpha).exp();
    if w == 0.0 || w.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_const + ((theta + nf) / alpha - 1.0) * ln_z + log_laplace_moment(stable, n, w)?)
}

/// P[K_n = k] recomputed as ∫ ρ({k}; α, n, z) f(z; α, θ, n) dz for each k.
///
/// This is the mixture behind the compound representation of K_n and serves
/// as an independent check of [`pmf_blocks`]. Each mixing-density value is
/// itself a quadrature, so this is meant for small n.
pub fn pmf_blocks_by_mixture(params: ModelParams, n: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidParams("pmf_blocks_by_mixture needs n >= 1".into()));
    }
    let alpha = params.alpha();
    let stable = StableDensitySpec::new(alpha)?;
    // Integrate over y = ln z around the typical size of S·G^α.
    let center = alpha * (params.theta() + n as f64).ln();
    let offsets = [-45.0, -25.0, -12.0, -6.0, -3.0, -1.5, -0.5, 0.0, 0.5, 1.0, 1.5, 2.5, 4.0, 7.0];
    let points: Vec<f64> = offsets.iter().map(|o| center + o).collect();
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut failure = None;
    let mut probs = Vec::with_capacity(n);
    for k in 1..=n {
        let est = integrate_breaks(
            |y: f64| {
                let log_f = match cache.get(&y.to_bits()) {
                    Some(&v) => v,
                    None => {
                        let v = match log_mixing_density_with(&stable, params, n, y.exp()) {
                            Ok(v) => v,
                            Err(e) => {
                                failure.get_or_insert(e);
                                f64::NAN
                            }
                        };
                        cache.insert(y.to_bits(), v);
                        v
                    }
                };
                match pmf_rho(alpha, n, y.exp()) {
                    Ok(rho) => (rho.log_prob(k) + log_f + y).exp(),
                    Err(_) => f64::NAN,
                }
            },
            &points,
            spec,
        );
        if let Some(e) = failure.take() {
            return Err(e);
        }
        probs.push(est?.value);
    }
    Ok(probs)
}
