//! Exact Kolmogorov distances between scaled block-count laws and their
//! Mittag-Leffler limits, and the rate harness built on them.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition_laws::{pmf_blocks, pmf_unseen, LogPmf, PosteriorContext, UnseenRoute};
use crate::quad::{integrate_breaks, QuadratureSpec};
use crate::specfun::{ln_beta, ModelParams};
use crate::stable::{ml_mean_closed_form, MittagLefflerLaw};

/// sup_x |P[K/scale ≤ x] − F(x)| for a law K on the nonnegative integers.
///
/// The step function only jumps at k/scale and F is continuous and
/// nondecreasing, so the supremum is attained at a jump, from the left or
/// from the right.
pub fn kolmogorov_discrete_vs_continuous<F>(pmf: &LogPmf, scale: f64, mut cdf: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParams(format!("scale = {scale} must be positive")));
    }
    let mut below = 0.0;
    let mut sup: f64 = 0.0;
    for (k, p) in pmf.iter() {
        let f = cdf(k as f64 / scale)?;
        let at = (below + p).min(1.0);
        sup = sup.max((at - f).abs()).max((below - f).abs());
        below = at;
    }
    Ok(sup.min(1.0))
}

/// Law of Pitman's posterior α-diversity B·S_{α,θ+n}, B ~ Beta(j + θ/α, n/α − j).
#[derive(Debug, Clone)]
pub struct PosteriorDiversityLaw {
    a: f64,
    b: f64,
    ml: MittagLefflerLaw,
    quadrature: QuadratureSpec,
}

impl PosteriorDiversityLaw {
    pub fn new(ctx: &PosteriorContext) -> Result<Self> {
        let (a, b) = (ctx.beta_a(), ctx.beta_b());
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InadmissibleContext(format!("Beta({a}, {b}) is not a valid law")));
        }
        let ml = MittagLefflerLaw::new(ctx.updated_params()?);
        ml.grid()?;
        Ok(PosteriorDiversityLaw { a, b, ml, quadrature: QuadratureSpec::default().with_abs_tol(1e-13) })
    }

    /// E[B]·E[S_{α,θ+n}].
    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b) * ml_mean_closed_form(self.ml.params())
    }

    /// P[B·S ≤ x] = ∫_0^1 Beta(u; a, b) F_{α,θ+n}(x/u) du.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("CDF argument is NaN".into()));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        let (a, b) = (self.a, self.b);
        let ln_norm = ln_beta(a, b);
        let mode = if a > 1.0 && b > 1.0 { (a - 1.0) / (a + b - 2.0) } else { 0.5 };
        let mut failure = None;
        let est = integrate_breaks(
            |u: f64| {
                if u <= 0.0 || u >= 1.0 {
                    return 0.0;
                }
                let w = ((a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p() - ln_norm).exp();
                match self.ml.cdf(x / u) {
                    Ok(f) => w * f,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &[0.0, mode, 1.0],
            &self.quadrature,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(est?.value.clamp(0.0, 1.0))
    }
}

/// Which discrete law a [`RateReport`] compares with its limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RateMode {
    /// K_n / n^α against S_{α,θ}.
    Prior,
    /// K_m^(n) / m^α given j species in n observations, against B·S_{α,θ+n}.
    Posterior { n: usize, j: usize },
}

/// One grid point of a rate experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    /// Sample size n (prior mode) or number of further draws m (posterior mode).
    pub n: usize,
    pub d_k: f64,
    /// n^α · d_K
    pub scaled: f64,
}

/// Kolmogorov distances over a grid of sample sizes with a least-squares
/// fit of log d_K against log n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub params: ModelParams,
    pub mode: RateMode,
    /// Whether the hypotheses of the corresponding rate theorem hold.
    pub theorem_scope: bool,
    pub grid: Vec<RateRow>,
    pub fitted_slope: f64,
    /// `None` when the grid has fewer than three points.
    pub slope_stderr: Option<f64>,
    pub intercept: f64,
}

impl RateReport {
    fn assemble(params: ModelParams, mode: RateMode, theorem_scope: bool, grid: Vec<RateRow>) -> Result<Self> {
        let xs: Vec<f64> = grid.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = grid.iter().map(|r| r.d_k.ln()).collect();
        let fit = ols(&xs, &ys)?;
        Ok(RateReport {
            params,
            mode,
            theorem_scope,
            grid,
            fitted_slope: fit.slope,
            slope_stderr: fit.stderr,
            intercept: fit.intercept,
        })
    }

    /// max/min of the scaled column n^α·d_K.
    pub fn scaled_ratio(&self) -> f64 {
        let max = self.grid.iter().map(|r| r.scaled).fold(f64::NEG_INFINITY, f64::max);
        let min = self.grid.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
        max / min
    }

    /// Whether the slope lies in [lo, hi] and the scaled column ratio is at
    /// most `max_ratio`.
    pub fn within(&self, lo: f64, hi: f64, max_ratio: f64) -> bool {
        self.fitted_slope >= lo && self.fitted_slope <= hi && self.scaled_ratio() <= max_ratio
    }

    /// CSV with '#'-prefixed metadata lines, then columns n, d_K, scaled.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# alpha={}", self.params.alpha())?;
        writeln!(out, "# theta={}", self.params.theta())?;
        match self.mode {
            RateMode::Prior => writeln!(out, "# mode=prior")?,
            RateMode::Posterior { n, j } => writeln!(out, "# mode=posterior n={n} j={j}")?,
        }
        writeln!(out, "# theorem_scope={}", self.theorem_scope)?;
        writeln!(out, "# fitted_slope={}", self.fitted_slope)?;
        match self.slope_stderr {
            Some(se) => writeln!(out, "# slope_stderr={se}")?,
            None => writeln!(out, "# slope_stderr=NA")?,
        }
        writeln!(out, "# intercept={}", self.intercept)?;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["n", "d_K", "scaled"]).map_err(csv_error)?;
        for row in &self.grid {
            writer
                .write_record([row.n.to_string(), row.d_k.to_string(), row.scaled.to_string()])
                .map_err(csv_error)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

struct OlsFit {
    slope: f64,
    intercept: f64,
    stderr: Option<f64>,
}

/// Ordinary least squares y = intercept + slope·x with the usual standard
/// error of the slope.
fn ols(xs: &[f64], ys: &[f64]) -> Result<OlsFit> {
    let k = xs.len();
    if k < 2 {
        return Err(Error::InvalidParams("a slope fit needs at least two grid points".into()));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(Error::DegenerateInput("a Kolmogorov distance is zero; log-log fit undefined".into()));
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = if k > 2 {
        let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        Some((ssr / (kf - 2.0) / sxx).sqrt())
    } else {
        None
    };
    Ok(OlsFit { slope, intercept, stderr })
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("the size grid is empty".into()));
    }
    if grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams(format!("the size grid must be positive and strictly increasing: {grid:?}")));
    }
    Ok(())
}

/// The default grid 16, 64, 256, … (ratio 4) with `points` entries.
pub fn default_grid(points: usize) -> Vec<usize> {
    (0..points).map(|i| 16usize << (2 * i)).collect()
}

/// d_K(K_n/n^α, S_{α,θ}) on each grid point, computed exactly (no Monte
/// Carlo). The report is labeled theorem-scope when θ > 5.
pub fn rate_experiment_prior(params: ModelParams, n_grid: &[usize]) -> Result<RateReport> {
    check_grid(n_grid)?;
    let law = MittagLefflerLaw::new(params);
    law.grid()?;
    let alpha = params.alpha();
    let rows = n_grid
        .par_iter()
        .map(|&n| {
            let pmf = pmf_blocks(params, n)?;
            let scale = (n as f64).powf(alpha);
            let d_k = kolmogorov_discrete_vs_continuous(&pmf, scale, |x| law.cdf(x))?;
            Ok(RateRow { n, d_k, scaled: scale * d_k })
        })
        .collect::<Result<Vec<_>>>()?;
    RateReport::assemble(params, RateMode::Prior, params.theta() > 5.0, rows)
}

/// d_K(K_m^(n)/m^α, B·S_{α,θ+n}) on each grid point of m. The report is
/// labeled theorem-scope when θ > 0, n ≥ 5 and n/α − j ≥ 1.
pub fn rate_experiment_posterior(ctx: &PosteriorContext, m_grid: &[usize]) -> Result<RateReport> {
    check_grid(m_grid)?;
    let law = PosteriorDiversityLaw::new(ctx)?;
    let alpha = ctx.alpha();
    let rows = m_grid
        .par_iter()
        .map(|&m| {
            let pmf = pmf_unseen(ctx, m, UnseenRoute::Mixture)?;
            let scale = (m as f64).powf(alpha);
            let d_k = kolmogorov_discrete_vs_continuous(&pmf, scale, |x| law.cdf(x))?;
            Ok(RateRow { n: m, d_k, scaled: scale * d_k })
        })
        .collect::<Result<Vec<_>>>()?;
    RateReport::assemble(ctx.params, RateMode::Posterior { n: ctx.n, j: ctx.j }, ctx.theorem_scope(), rows)
}
