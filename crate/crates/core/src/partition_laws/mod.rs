//! Exact finite-n laws of the two-parameter Poisson-Dirichlet partition:
//! the block count K_n, the Ewens-Pitman sampling formula, the conditioned
//! compound-Poisson law ρ and its limit, the mixing density of the compound
//! representation, and the posterior law of the number of unseen species.

mod posterior;
mod prior;

pub use posterior::{pmf_unseen, UnseenRoute};
pub use prior::{
    log_mixing_density, mixing_density, pmf_blocks, pmf_blocks_by_mixture, pmf_esf, pmf_rho, pmf_rho_limit,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{log_sum_exp, ModelParams};

/// Normalization tolerance on the log scale for exact laws.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// A finite discrete law on the integer window
/// `support_min..support_min + log_probs.len()`, stored as log-probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPmf {
    support_min: usize,
    log_probs: Vec<f64>,
}

impl LogPmf {
    /// Wraps log-probabilities that already sum to one within
    /// [`NORMALIZATION_TOL`].
    pub fn new(support_min: usize, log_probs: Vec<f64>) -> Result<Self> {
        if log_probs.is_empty() {
            return Err(Error::InvalidParams("a pmf needs a nonempty support".into()));
        }
        if log_probs.iter().any(|v| v.is_nan() || *v > NORMALIZATION_TOL) {
            return Err(Error::InvalidParams("log-probabilities must be <= 0 and not NaN".into()));
        }
        let total = log_sum_exp(&log_probs);
        if !(total.abs() <= NORMALIZATION_TOL) {
            return Err(Error::Normalization(total.exp_m1()));
        }
        Ok(LogPmf { support_min, log_probs })
    }

    /// Normalizes arbitrary log-weights by a single max-subtracted sum.
    pub fn from_log_weights(support_min: usize, mut log_weights: Vec<f64>) -> Result<Self> {
        let total = log_sum_exp(&log_weights);
        if !total.is_finite() {
            return Err(Error::Normalization(f64::NAN));
        }
        for w in &mut log_weights {
            *w -= total;
        }
        LogPmf::new(support_min, log_weights)
    }

    /// Like [`LogPmf::from_log_weights`], but first checks that the weights
    /// were already normalized to within `tol` (a consistency check on an
    /// exact formula) before removing the residual rounding.
    pub(crate) fn from_checked_log_weights(support_min: usize, log_weights: Vec<f64>, tol: f64) -> Result<Self> {
        let total = log_sum_exp(&log_weights);
        if !(total.abs() <= tol) {
            return Err(Error::Normalization(total.exp_m1()));
        }
        LogPmf::from_log_weights(support_min, log_weights)
    }

    /// A point mass at `k`.
    pub fn point_mass(k: usize) -> Self {
        LogPmf { support_min: k, log_probs: vec![0.0] }
    }

    #[inline]
    pub fn support_min(&self) -> usize {
        self.support_min
    }

    /// Largest support point (inclusive).
    #[inline]
    pub fn support_max(&self) -> usize {
        self.support_min + self.log_probs.len() - 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    /// log P[X = k]; −∞ outside the support.
    pub fn log_prob(&self, k: usize) -> f64 {
        if k < self.support_min || k > self.support_max() {
            f64::NEG_INFINITY
        } else {
            self.log_probs[k - self.support_min]
        }
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.log_prob(k).exp()
    }

    /// (k, P[X = k]) pairs over the support window.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.log_probs.iter().enumerate().map(move |(i, lp)| (self.support_min + i, lp.exp()))
    }

    /// Probabilities over the support window.
    pub fn probs(&self) -> Vec<f64> {
        self.log_probs.iter().map(|lp| lp.exp()).collect()
    }

    /// P[X ≤ k] for each support point, clamped to [0, 1].
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.log_probs
            .iter()
            .map(|lp| {
                acc += lp.exp();
                acc.min(1.0)
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.iter().map(|(k, p)| (k as f64 - mean).powi(2) * p).sum()
    }

    /// Smallest k with P[X ≤ k] ≥ p.
    pub fn quantile(&self, p: f64) -> usize {
        let mut acc = 0.0;
        for (k, prob) in self.iter() {
            acc += prob;
            if acc >= p {
                return k;
            }
        }
        self.support_max()
    }

    /// Total-variation distance, treating points outside either window as
    /// zero mass.
    pub fn total_variation(&self, other: &LogPmf) -> f64 {
        let lo = self.support_min.min(other.support_min);
        let hi = self.support_max().max(other.support_max());
        0.5 * (lo..=hi).map(|k| (self.prob(k) - other.prob(k)).abs()).sum::<f64>()
    }
}

/// Block-size multiplicities of a partition of {1..n}: `m_l` blocks of size l.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    multiplicities: Vec<usize>,
}

impl Partition {
    /// `multiplicities[l − 1]` is the number of blocks of size l. Trailing
    /// entries may be omitted; the vector is padded to length n.
    pub fn new(n: usize, mut multiplicities: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPartition("n must be at least 1".into()));
        }
        if multiplicities.len() > n {
            if multiplicities[n..].iter().any(|&m| m != 0) {
                return Err(Error::InvalidPartition(format!("a block is larger than n = {n}")));
            }
            multiplicities.truncate(n);
        }
        multiplicities.resize(n, 0);
        let total: usize = multiplicities.iter().enumerate().map(|(i, &m)| (i + 1) * m).sum();
        if total != n {
            return Err(Error::InvalidPartition(format!("block sizes sum to {total}, expected n = {n}")));
        }
        Ok(Partition { n, multiplicities })
    }

    /// Builds the partition from a list of block sizes.
    pub fn from_block_sizes(sizes: &[usize]) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidPartition("block sizes must be positive".into()));
        }
        let n: usize = sizes.iter().sum();
        if n == 0 {
            return Err(Error::InvalidPartition("a partition needs at least one block".into()));
        }
        let mut multiplicities = vec![0; n];
        for &s in sizes {
            multiplicities[s - 1] += 1;
        }
        Partition::new(n, multiplicities)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// `m_1..m_n`.
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Number of blocks j = Σ m_l.
    pub fn num_blocks(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Block sizes in decreasing order.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.num_blocks());
        for (i, &m) in self.multiplicities.iter().enumerate().rev() {
            sizes.extend(std::iter::repeat_n(i + 1, m));
        }
        sizes
    }
}

/// Conditioning data for posterior objects: n observations showing j
/// distinct species under PD(α, θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorContext {
    pub params: ModelParams,
    pub n: usize,
    pub j: usize,
}

impl PosteriorContext {
    pub fn new(params: ModelParams, n: usize, j: usize) -> Result<Self> {
        if n == 0 || j == 0 || j > n {
            return Err(Error::InadmissibleContext(format!("need 1 <= j <= n, got n = {n}, j = {j}")));
        }
        Ok(PosteriorContext { params, n, j })
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn theta(&self) -> f64 {
        self.params.theta()
    }

    /// First Beta parameter j + θ/α of the posterior α-diversity.
    pub fn beta_a(&self) -> f64 {
        self.j as f64 + self.theta() / self.alpha()
    }

    /// Second Beta parameter n/α − j of the posterior α-diversity.
    pub fn beta_b(&self) -> f64 {
        self.n as f64 / self.alpha() - self.j as f64
    }

    /// Whether θ > 0, n ≥ 5 and n/α − j ≥ 1, the hypotheses under which the
    /// posterior m^{−α} rate is proved.
    pub fn theorem_scope(&self) -> bool {
        self.theta() > 0.0 && self.n >= 5 && self.beta_b() >= 1.0
    }

    /// The model updated by the n observations, PD(α, θ + n).
    pub fn updated_params(&self) -> Result<ModelParams> {
        self.params.with_theta_shift(self.n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_pmf_checks_normalization() {
        assert!(LogPmf::new(0, vec![0.5f64.ln(), 0.5f64.ln()]).is_ok());
        assert!(matches!(LogPmf::new(0, vec![0.5f64.ln(), 0.4f64.ln()]), Err(Error::Normalization(_))));
        let pmf = LogPmf::from_log_weights(1, vec![1.0, 1.0, 2.0f64.ln() + 1.0]).unwrap();
        assert!((pmf.prob(3) - 0.5).abs() < 1e-15);
        assert_eq!(pmf.support_max(), 3);
        assert_eq!(pmf.prob(0), 0.0);
        assert_eq!(pmf.quantile(0.3), 2);
        assert!((pmf.mean() - 2.25).abs() < 1e-14);
    }

    #[test]
    fn total_variation_ignores_zero_padding() {
        let a = LogPmf::from_log_weights(1, vec![0.0, 0.0]).unwrap();
        let b = LogPmf::from_log_weights(0, vec![f64::NEG_INFINITY, 0.0, 0.0, f64::NEG_INFINITY]).unwrap();
        assert!(a.total_variation(&b).abs() < 1e-15);
        assert!((a.total_variation(&LogPmf::point_mass(5)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partition_validation() {
        let p = Partition::from_block_sizes(&[2, 1]).unwrap();
        assert_eq!(p.n(), 3);
        assert_eq!(p.multiplicities(), &[1, 1, 0]);
        assert_eq!(p.num_blocks(), 2);
        assert_eq!(p.block_sizes(), vec![2, 1]);
        assert!(Partition::new(3, vec![1]).is_err());
        assert!(Partition::new(2, vec![0, 1, 0, 0]).is_ok());
        assert!(Partition::new(2, vec![0, 0, 1]).is_err());
        assert!(Partition::new(0, vec![]).is_err());
    }

    #[test]
    fn posterior_context_scope() {
        let params = ModelParams::new(0.5, 1.0).unwrap();
        let ctx = PosteriorContext::new(params, 10, 4).unwrap();
        assert!(ctx.theorem_scope());
        assert!((ctx.beta_a() - 6.0).abs() < 1e-15);
        assert!((ctx.beta_b() - 16.0).abs() < 1e-15);
        assert!(!PosteriorContext::new(params, 2, 1).unwrap().theorem_scope());
        assert!(PosteriorContext::new(params, 3, 4).is_err());
        assert!(PosteriorContext::new(params, 3, 0).is_err());
    }
}
