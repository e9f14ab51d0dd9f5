use serde::{Deserialize, Serialize};

use super::{pmf_blocks, LogPmf, PosteriorContext, NORMALIZATION_TOL};
use crate::error::{Error, Result};
use crate::specfun::{gfc_row_cached, log_add_exp};

/// How [`pmf_unseen`] evaluates the posterior law of K_m^(n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnseenRoute {
    /// Closed form through non-central generalized factorial coefficients.
    Noncentral,
    /// Beta-Binomial mixture over the block count of PD(α, θ + n).
    #[default]
    Mixture,
}

/// Posterior law of the number K_m^(n) of new species among m further draws,
/// given j species in the first n, on {0..m}.
///
/// * `Noncentral`: P[K = k] = [θ/α + j]_(k) / [θ + n]_(m) · 𝒞(m, k; α, −n + jα),
///   where [x]_(k) is the rising factorial with increment 1.
/// * `Mixture`: K is Binomial(K*_m, B) with K*_m the block count of m draws
///   from PD(α, θ + n) and B ~ Beta(θ/α + j, n/α − j) independent.
pub fn pmf_unseen(ctx: &PosteriorContext, m: usize, route: UnseenRoute) -> Result<LogPmf> {
    if m == 0 {
        return Err(Error::InvalidParams("pmf_unseen needs m >= 1".into()));
    }
    let weights = match route {
        UnseenRoute::Noncentral => noncentral_weights(ctx, m)?,
        UnseenRoute::Mixture => mixture_weights(ctx, m)?,
    };
    LogPmf::from_checked_log_weights(0, weights, NORMALIZATION_TOL)
}

fn noncentral_weights(ctx: &PosteriorContext, m: usize) -> Result<Vec<f64>> {
    let alpha = ctx.alpha();
    let shift = -(ctx.n as f64) + ctx.j as f64 * alpha;
    let row = gfc_row_cached(alpha, m, shift)?;
    let a = ctx.beta_a();
    let theta_n = ctx.theta() + ctx.n as f64;
    let denom: f64 = (0..m).map(|i| (theta_n + i as f64).ln()).sum();
    let mut numer = 0.0;
    let mut weights = Vec::with_capacity(m + 1);
    for (k, &log_coef) in row.iter().enumerate() {
        if k > 0 {
            numer += (a + (k - 1) as f64).ln();
        }
        weights.push(numer + log_coef - denom);
    }
    Ok(weights)
}

fn mixture_weights(ctx: &PosteriorContext, m: usize) -> Result<Vec<f64>> {
    let kstar = pmf_blocks(ctx.updated_params()?, m)?;
    let (a, b) = (ctx.beta_a(), ctx.beta_b());
    if !(b > 0.0) {
        return Err(Error::InadmissibleContext(format!("n/alpha - j = {b} must be positive")));
    }
    // Tables of ln i, ln(a + i) and ln(b + i) for i = 0..=m.
    let ln_int: Vec<f64> = (0..=m).map(|i| (i as f64).ln()).collect();
    let ln_a: Vec<f64> = (0..=m).map(|i| (a + i as f64).ln()).collect();
    let ln_b: Vec<f64> = (0..=m).map(|i| (b + i as f64).ln()).collect();
    let mut acc = vec![f64::NEG_INFINITY; m + 1];
    // ln BB(0; l, a, b) = ln [b]_(l) − ln [a + b]_(l), accumulated over l.
    let mut ln_bb_zero = 0.0;
    for l in 1..=m {
        ln_bb_zero += ln_b[l - 1] - (a + b + (l - 1) as f64).ln();
        let lp = kstar.log_prob(l);
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let mut ln_bb = ln_bb_zero;
        acc[0] = log_add_exp(acc[0], lp + ln_bb);
        for k in 0..l {
            // BB(k+1)/BB(k) = (l − k)/(k + 1) · (a + k)/(b + l − k − 1)
            ln_bb += ln_int[l - k] - ln_int[k + 1] + ln_a[k] - ln_b[l - k - 1];
            acc[k + 1] = log_add_exp(acc[k + 1], lp + ln_bb);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ModelParams;

    fn ctx(alpha: f64, theta: f64, n: usize, j: usize) -> PosteriorContext {
        PosteriorContext::new(ModelParams::new(alpha, theta).unwrap(), n, j).unwrap()
    }

    #[test]
    fn one_more_draw_uses_predictive_weight() {
        for route in [UnseenRoute::Noncentral, UnseenRoute::Mixture] {
            let pmf = pmf_unseen(&ctx(0.5, 1.0, 2, 1), 1, route).unwrap();
            assert!((pmf.prob(1) - 0.5).abs() < 1e-14, "{route:?}");
            let c = ctx(0.3, 2.5, 7, 3);
            let want = (2.5 + 3.0 * 0.3) / (2.5 + 7.0);
            assert!((pmf_unseen(&c, 1, route).unwrap().prob(1) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn routes_agree() {
        let c = ctx(0.5, 1.0, 10, 4);
        for m in 1..=12 {
            let a = pmf_unseen(&c, m, UnseenRoute::Noncentral).unwrap();
            let b = pmf_unseen(&c, m, UnseenRoute::Mixture).unwrap();
            for k in 0..=m {
                assert!((a.prob(k) - b.prob(k)).abs() < 1e-10, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn routes_agree_for_negative_theta() {
        let c = ctx(0.7, -0.5, 6, 5);
        for m in [3, 20, 80] {
            let a = pmf_unseen(&c, m, UnseenRoute::Noncentral).unwrap();
            let b = pmf_unseen(&c, m, UnseenRoute::Mixture).unwrap();
            assert!(a.total_variation(&b) < 1e-10, "m={m}");
        }
    }

    #[test]
    fn larger_m_normalizes() {
        let c = ctx(0.5, 1.0, 10, 4);
        let pmf = pmf_unseen(&c, 1000, UnseenRoute::Mixture).unwrap();
        assert!((pmf.probs().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(pmf_unseen(&c, 0, UnseenRoute::Mixture).is_err());
    }
}
