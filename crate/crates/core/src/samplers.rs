//! Random-variate generation for the partition model and its limit laws.
//!
//! Every sampler draws from a caller-supplied [`Rng`]. Reproducible streams
//! come from [`SeedSpec`], which maps (master seed, stream id) to an
//! independent ChaCha20 stream, so replicate i can use stream i no matter
//! which thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Beta, Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition_laws::{pmf_rho, LogPmf, Partition, PosteriorContext};
use crate::specfun::{ln_gamma, ModelParams};
use crate::stable::MittagLefflerLaw;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeedSpec { master_seed, stream_id }
    }

    /// The same master seed on another stream.
    pub fn with_stream(self, stream_id: u64) -> Self {
        SeedSpec { stream_id, ..self }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Draws a random partition of {1..n} by sequential seating.
///
/// After i customers in j blocks, the next one opens a new block with
/// probability (θ + jα)/(θ + i) and joins block b with probability
/// (n_b − α)/(θ + i). The existing block is found by picking a previous
/// customer uniformly (probability n_b/i) and accepting with probability
/// (n_b − α)/n_b, which is exact and O(1) on average.
pub fn sample_partition<R: Rng + ?Sized>(params: ModelParams, n: usize, rng: &mut R) -> Result<Partition> {
    if n == 0 {
        return Err(Error::InvalidParams("sample_partition needs n >= 1".into()));
    }
    let (alpha, theta) = (params.alpha(), params.theta());
    let mut seat: Vec<u32> = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    seat.push(0);
    sizes.push(1);
    for i in 1..n {
        let j = sizes.len() as f64;
        let p_new = (theta + j * alpha) / (theta + i as f64);
        if rng.gen::<f64>() < p_new {
            seat.push(sizes.len() as u32);
            sizes.push(1);
            continue;
        }
        loop {
            let b = seat[rng.gen_range(0..i)] as usize;
            let nb = sizes[b] as f64;
            if rng.gen::<f64>() * nb < nb - alpha {
                seat.push(b as u32);
                sizes[b] += 1;
                break;
            }
        }
    }
    Partition::from_block_sizes(&sizes)
}

/// Inverse-CDF sampler for S_{α,θ} built on the cached CDF grid.
#[derive(Debug, Clone)]
pub struct MlSampler {
    law: MittagLefflerLaw,
}

impl MlSampler {
    /// Builds the CDF grid eagerly so the sampler can be shared across threads.
    pub fn new(params: ModelParams) -> Result<Self> {
        let law = MittagLefflerLaw::new(params);
        law.grid()?;
        Ok(MlSampler { law })
    }

    pub fn law(&self) -> &MittagLefflerLaw {
        &self.law
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        // Open interval (0, 1): gen::<f64>() is in [0, 1).
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break u;
            }
        };
        self.law.quantile_grid(u)
    }
}

/// One draw of S_{α,θ}.
pub fn sample_ml<R: Rng + ?Sized>(params: ModelParams, rng: &mut R) -> Result<f64> {
    MlSampler::new(params)?.sample(rng)
}

/// Cumulative mass kept in the inversion table of [`TruncEnbSampler`].
const ENB_TABLE_MASS: f64 = 1.0 - 1e-14;
/// Longest inversion table; beyond it the sampler keeps walking the pmf.
const ENB_TABLE_CAP: usize = 1 << 20;

/// Zero-truncated extended negative binomial law of Q(α, q) on {1, 2, …}:
/// P[Q = x] = Γ(α+1) sin(πα)/π · Γ(x−α)/x! · q^x / (1 − (1−q)^α).
#[derive(Debug, Clone)]
pub struct TruncEnbSampler {
    alpha: f64,
    q: f64,
    p_one: f64,
    cumulative: Vec<f64>,
    /// P[Q = cumulative.len() + 1].
    next_mass: f64,
}

impl TruncEnbSampler {
    pub fn new(alpha: f64, q: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParams(format!("q = {q} must lie in (0, 1)")));
        }
        let p_one = alpha * q / -(alpha * (-q).ln_1p()).exp_m1();
        let mut cumulative = Vec::new();
        let mut p = p_one;
        let mut acc = 0.0;
        let mut x = 1usize;
        while acc < ENB_TABLE_MASS && cumulative.len() < ENB_TABLE_CAP && p > 0.0 {
            acc += p;
            cumulative.push(acc);
            // P[x+1]/P[x] = q(x − α)/(x + 1)
            p *= q * (x as f64 - alpha) / (x as f64 + 1.0);
            x += 1;
        }
        Ok(TruncEnbSampler { alpha, q, p_one, cumulative, next_mass: p })
    }

    /// P[Q = 1] = αq/(1 − (1 − q)^α).
    pub fn p_one(&self) -> f64 {
        self.p_one
    }

    /// P[Q = x] in closed form.
    pub fn pmf(&self, x: usize) -> f64 {
        if x == 0 {
            return 0.0;
        }
        let ln_c = ln_gamma(self.alpha + 1.0) + (std::f64::consts::PI * self.alpha).sin().ln()
            - std::f64::consts::PI.ln()
            - (-(self.alpha * (-self.q).ln_1p()).exp_m1()).ln();
        (ln_c + ln_gamma(x as f64 - self.alpha) - ln_gamma(x as f64 + 1.0) + x as f64 * self.q.ln()).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        if idx < self.cumulative.len() {
            return idx + 1;
        }
        // Past the table: continue the cumulative walk from x = len + 1.
        let mut x = self.cumulative.len() + 1;
        let mut acc = self.cumulative.last().copied().unwrap_or(0.0);
        let mut p = self.next_mass;
        loop {
            acc += p;
            if acc > u || p == 0.0 {
                return x;
            }
            p *= self.q * (x as f64 - self.alpha) / (x as f64 + 1.0);
            x += 1;
        }
    }
}

/// One draw of Q(α, q).
pub fn sample_trunc_enb<R: Rng + ?Sized>(alpha: f64, q: f64, rng: &mut R) -> Result<usize> {
    Ok(TruncEnbSampler::new(alpha, q)?.sample(rng))
}

/// The compound Poisson pair (N, S): N ~ Poisson(z[1 − (1−q)^α]) and S the
/// sum of N independent Q(α, q) draws.
#[derive(Debug, Clone)]
pub struct CompoundSampler {
    enb: TruncEnbSampler,
    lambda: f64,
}

impl CompoundSampler {
    pub fn new(alpha: f64, q: f64, z: f64) -> Result<Self> {
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::Domain(format!("z = {z} must be positive")));
        }
        let enb = TruncEnbSampler::new(alpha, q)?;
        let lambda = -z * (alpha * (-q).ln_1p()).exp_m1();
        Ok(CompoundSampler { enb, lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let count = if self.lambda > 0.0 {
            Poisson::new(self.lambda).map(|d| d.sample(rng) as usize).unwrap_or(0)
        } else {
            0
        };
        let total = (0..count).map(|_| self.enb.sample(rng)).sum();
        (count, total)
    }
}

/// One draw of (N, S).
pub fn sample_compound<R: Rng + ?Sized>(alpha: f64, q: f64, z: f64, rng: &mut R) -> Result<(usize, usize)> {
    Ok(CompoundSampler::new(alpha, q, z)?.sample(rng))
}

/// Draws K_n through the compound representation: z = S_{α,θ}·G^α with
/// G ~ Gamma(θ + n, 1), then K ~ ρ(·; α, n, z).
#[derive(Debug, Clone)]
pub struct RepresentationSampler {
    ml: MlSampler,
    gamma: Gamma<f64>,
    alpha: f64,
    n: usize,
}

impl RepresentationSampler {
    pub fn new(params: ModelParams, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("representation sampler needs n >= 1".into()));
        }
        let gamma = Gamma::new(params.theta() + n as f64, 1.0)
            .map_err(|e| Error::InvalidParams(format!("gamma shape: {e}")))?;
        Ok(RepresentationSampler { ml: MlSampler::new(params)?, gamma, alpha: params.alpha(), n })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        if self.n == 1 {
            return Ok(1);
        }
        let s = self.ml.sample(rng)?;
        let g = self.gamma.sample(rng);
        let z = s * g.powf(self.alpha);
        let rho = pmf_rho(self.alpha, self.n, z)?;
        Ok(sample_discrete(&rho, rng))
    }
}

/// One draw of K_n through the compound representation.
pub fn sample_blocks_via_representation<R: Rng + ?Sized>(params: ModelParams, n: usize, rng: &mut R) -> Result<usize> {
    RepresentationSampler::new(params, n)?.sample(rng)
}

/// Inversion on a finite pmf.
pub fn sample_discrete<R: Rng + ?Sized>(pmf: &LogPmf, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, p) in pmf.iter() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    pmf.support_max()
}

/// Pitman's posterior α-diversity B·S_{α,θ+n} with B ~ Beta(j + θ/α, n/α − j)
/// independent of S.
#[derive(Debug, Clone)]
pub struct PosteriorDiversitySampler {
    beta: Beta<f64>,
    ml: MlSampler,
}

impl PosteriorDiversitySampler {
    pub fn new(ctx: &PosteriorContext) -> Result<Self> {
        let (a, b) = (ctx.beta_a(), ctx.beta_b());
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InadmissibleContext(format!("Beta({a}, {b}) is not a valid law")));
        }
        let beta = Beta::new(a, b).map_err(|e| Error::InadmissibleContext(format!("Beta({a}, {b}): {e}")))?;
        Ok(PosteriorDiversitySampler { beta, ml: MlSampler::new(ctx.updated_params()?)? })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let b = self.beta.sample(rng);
        Ok(b * self.ml.sample(rng)?)
    }
}

/// One draw of the posterior α-diversity.
pub fn sample_posterior_diversity<R: Rng + ?Sized>(ctx: &PosteriorContext, rng: &mut R) -> Result<f64> {
    PosteriorDiversitySampler::new(ctx)?.sample(rng)
}
