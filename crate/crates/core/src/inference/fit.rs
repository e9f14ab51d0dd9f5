use argmin::core::{CostFunction, Executor, State, TerminationReason, TerminationStatus};
use argmin::solver::neldermead::NelderMead;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpeciesSample;
use crate::error::{Error, Result};
use crate::partition_laws::{pmf_esf, Partition};
use crate::specfun::ModelParams;

/// Search box α ∈ [ε, 1 − ε], θ ∈ [−α + ε, θ_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitBox {
    pub epsilon: f64,
    pub theta_max: f64,
    /// Iteration cap for each simplex run.
    pub max_iters: u64,
}

impl Default for FitBox {
    fn default() -> Self {
        FitBox { epsilon: 1e-4, theta_max: 1e4, max_iters: 2000 }
    }
}

impl FitBox {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(Error::InvalidParams(format!("box margin {} must lie in (0, 0.25)", self.epsilon)));
        }
        if !(self.theta_max.is_finite() && self.theta_max > 1.0) {
            return Err(Error::InvalidParams(format!("theta_max = {} must exceed 1", self.theta_max)));
        }
        Ok(())
    }

    /// Search coordinates are (α, φ) with φ = ln(θ + α), so the lower θ
    /// bound becomes the constant φ ≥ ln ε and the wide θ range is
    /// explored on a log scale.
    fn clamp(&self, p: &[f64]) -> (f64, f64) {
        let alpha = p[0].clamp(self.epsilon, 1.0 - self.epsilon);
        let phi = p[1].clamp(self.epsilon.ln(), (self.theta_max + alpha).ln());
        (alpha, phi)
    }

    fn params(&self, p: &[f64]) -> Result<ModelParams> {
        let (alpha, phi) = self.clamp(p);
        let theta = (phi.exp() - alpha).min(self.theta_max);
        ModelParams::new(alpha, theta.max(-alpha + self.epsilon))
    }

    fn on_boundary(&self, p: &[f64]) -> bool {
        const TOL: f64 = 1e-6;
        let (alpha, phi) = self.clamp(p);
        let outside = (alpha - p[0]).abs() > 0.0 || (phi - p[1]).abs() > 0.0;
        let near = alpha <= self.epsilon + TOL
            || alpha >= 1.0 - self.epsilon - TOL
            || phi <= self.epsilon.ln() + TOL
            || phi >= (self.theta_max + alpha).ln() - TOL;
        outside || near
    }
}

/// Maximum-likelihood estimate of (α, θ) from one observed partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    pub log_likelihood: f64,
    /// The best simplex run stopped on its own tolerance, not the iteration cap.
    pub converged: bool,
    /// The optimum sits on (or was clamped to) the edge of the search box.
    pub boundary_flag: bool,
}

struct NegLogLik<'a> {
    partition: &'a Partition,
    bounds: FitBox,
}

impl CostFunction for NegLogLik<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        let (alpha, phi) = self.bounds.clamp(p);
        // A quadratic penalty outside the box steers the simplex back while
        // keeping the objective continuous.
        let excess = (alpha - p[0]).powi(2) + (phi - p[1]).powi(2);
        let params = self.bounds.params(p)?;
        Ok(-pmf_esf(params, self.partition)? + 1e3 * excess)
    }
}

/// Starting points (α, θ) for the simplex runs.
const STARTS: [(f64, f64); 5] = [(0.25, 1.0), (0.5, 1.0), (0.75, 1.0), (0.5, 20.0), (0.3, 0.05)];

/// Maximizes the sampling-formula log-likelihood over the box with five
/// Nelder-Mead runs in parallel, keeping the best.
pub fn fit_eppf(sample: &SpeciesSample, bounds: FitBox) -> Result<FitResult> {
    bounds.validate()?;
    if sample.n() < 2 {
        return Err(Error::DegenerateInput(format!("fitting needs n >= 2, got n = {}", sample.n())));
    }
    let partition = sample.partition();
    let runs: Vec<Result<(Vec<f64>, f64, bool)>> = STARTS
        .par_iter()
        .map(|&(alpha, theta)| {
            let p0 = vec![alpha, (theta + alpha).ln()];
            let simplex = vec![p0.clone(), vec![p0[0] + 0.1, p0[1]], vec![p0[0], p0[1] + 1.0]];
            let solver = NelderMead::new(simplex).with_sd_tolerance(1e-10).map_err(optim_error)?;
            let cost = NegLogLik { partition, bounds };
            let res = Executor::new(cost, solver)
                .configure(|s| s.max_iters(bounds.max_iters))
                .run()
                .map_err(optim_error)?;
            let state = res.state();
            let best = state.get_best_param().cloned().ok_or_else(|| Error::NonConvergence("simplex returned no point".into()))?;
            let converged = matches!(
                state.get_termination_status(),
                TerminationStatus::Terminated(TerminationReason::SolverConverged)
            );
            Ok((best, state.get_best_cost(), converged))
        })
        .collect();
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (point, _, converged) = best.expect("at least one start");
    let params = bounds.params(&point)?;
    Ok(FitResult {
        params,
        log_likelihood: pmf_esf(params, partition)?,
        converged,
        boundary_flag: bounds.on_boundary(&point),
    })
}

fn optim_error(e: argmin::core::Error) -> Error {
    Error::NonConvergence(format!("simplex search failed: {e}"))
}
