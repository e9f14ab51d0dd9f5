use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition_laws::{pmf_unseen, PosteriorContext, UnseenRoute};
use crate::samplers::{PosteriorDiversitySampler, SeedSpec};

/// Largest m handled by the exact posterior law unless configured otherwise.
pub const DEFAULT_EXACT_LIMIT: usize = 5000;

/// Requested evaluation strategy for [`predict_unseen`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictMode {
    /// Exact when m is within the exact limit, asymptotic otherwise.
    #[default]
    Auto,
    Exact,
    Asymptotic,
}

/// Strategy actually used for an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictOptions {
    pub mode: PredictMode,
    /// Credible level of the equal-tail interval, in (0, 1).
    pub level: f64,
    /// Monte Carlo draws in asymptotic mode.
    pub mc_draws: usize,
    pub seed: u64,
    pub exact_limit: usize,
}

impl Default for PredictOptions {
    fn default() -> Self {
        PredictOptions { mode: PredictMode::Auto, level: 0.95, mc_draws: 10_000, seed: 0, exact_limit: DEFAULT_EXACT_LIMIT }
    }
}

/// Point and interval estimate of the number of new species in m further draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnseenEstimate {
    pub m: usize,
    pub mode: EstimateMode,
    pub mean: f64,
    pub median: f64,
    pub level: f64,
    pub credible_interval: (f64, f64),
    /// Present in asymptotic mode only.
    pub mc_draws: Option<usize>,
}

/// Predicts K_m^(n) given `ctx`.
///
/// Exact mode reads the mean and equal-tail interval off the posterior law.
/// Asymptotic mode draws the posterior α-diversity S and reports the law of
/// m^α·S, with replicate i drawn from stream i of `seed` so the result does
/// not depend on the thread count.
pub fn predict_unseen(ctx: &PosteriorContext, m: usize, opts: &PredictOptions) -> Result<UnseenEstimate> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::InvalidParams(format!("level = {} must lie in (0, 1)", opts.level)));
    }
    let mode = match opts.mode {
        PredictMode::Auto if m <= opts.exact_limit => EstimateMode::Exact,
        PredictMode::Auto => EstimateMode::Asymptotic,
        PredictMode::Exact if m > opts.exact_limit => return Err(Error::ExactLimit { m, limit: opts.exact_limit }),
        PredictMode::Exact => EstimateMode::Exact,
        PredictMode::Asymptotic => EstimateMode::Asymptotic,
    };
    let tail = 0.5 * (1.0 - opts.level);
    match mode {
        EstimateMode::Exact => {
            let pmf = pmf_unseen(ctx, m, UnseenRoute::Mixture)?;
            Ok(UnseenEstimate {
                m,
                mode,
                mean: pmf.mean(),
                median: pmf.quantile(0.5) as f64,
                level: opts.level,
                credible_interval: (pmf.quantile(tail) as f64, pmf.quantile(1.0 - tail) as f64),
                mc_draws: None,
            })
        }
        EstimateMode::Asymptotic => {
            if opts.mc_draws < 2 {
                return Err(Error::InvalidParams("asymptotic mode needs at least 2 draws".into()));
            }
            let sampler = PosteriorDiversitySampler::new(ctx)?;
            let scale = (m as f64).powf(ctx.alpha());
            let mut draws = (0..opts.mc_draws as u64)
                .into_par_iter()
                .map(|i| Ok(scale * sampler.sample(&mut SeedSpec::new(opts.seed, i).rng())?))
                .collect::<Result<Vec<f64>>>()?;
            draws.sort_by(f64::total_cmp);
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            Ok(UnseenEstimate {
                m,
                mode,
                mean,
                median: sorted_quantile(&draws, 0.5),
                level: opts.level,
                credible_interval: (sorted_quantile(&draws, tail), sorted_quantile(&draws, 1.0 - tail)),
                mc_draws: Some(opts.mc_draws),
            })
        }
    }
}

/// Linear interpolation between order statistics of sorted data.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
