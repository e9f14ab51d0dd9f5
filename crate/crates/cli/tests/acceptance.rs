//! Acceptance suite: one PASS/FAIL line per criterion, each at its stated
//! tolerance and time budget. Exits nonzero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use pitman_core::berry_esseen::{rate_experiment_posterior, rate_experiment_prior};
use pitman_core::inference::{fit_eppf, FitBox, SpeciesSample};
use pitman_core::partition_laws::{pmf_blocks, pmf_blocks_by_mixture, pmf_esf, pmf_rho, pmf_rho_limit, pmf_unseen};
use pitman_core::samplers::{sample_partition, MlSampler, RepresentationSampler, SeedSpec};
use pitman_core::specfun::exact::gfc_exact_f64;
use pitman_core::specfun::{ln_gamma, GfcTable};
use pitman_core::stable::{laplace_integral, stable_density, MittagLefflerLaw};
use pitman_core::{ModelParams, Partition, PosteriorContext, QuadratureSpec, UnseenRoute};

type Outcome = Result<String, String>;

/// Name, time budget and check of one criterion.
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn coefficient_correctness() -> Outcome {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.2, 0.5, 0.8] {
        let table = GfcTable::build(alpha, 12, 0.0).map_err(fail)?;
        for n in 1..=12 {
            for k in 1..=n {
                let exact = gfc_exact_f64(n, k, alpha, 0.0).ok_or("nonpositive exact coefficient")?;
                worst = worst.max((table.log_coef(n, k).exp() / exact - 1.0).abs());
            }
        }
    }
    check(worst < 1e-10, format!("max relative error {worst:.2e} (tol 1e-10)"))
}

fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

fn enumeration_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for &(alpha, theta) in &[(0.5, 1.0), (0.25, -0.2), (0.8, 3.0)] {
        let params = ModelParams::new(alpha, theta).map_err(fail)?;
        for n in 1..=8 {
            let blocks = pmf_blocks(params, n).map_err(fail)?;
            let mut by_k = vec![0.0; n + 1];
            for sizes in integer_partitions(n) {
                let part = Partition::from_block_sizes(&sizes).map_err(fail)?;
                by_k[part.num_blocks()] += pmf_esf(params, &part).map_err(fail)?.exp();
            }
            for k in 1..=n {
                worst = worst.max((by_k[k] - blocks.prob(k)).abs());
            }
        }
    }
    check(worst < 1e-10, format!("max abs error {worst:.2e} (tol 1e-10)"))
}

/// P[N = k | Σ_{i ≤ N} Q_i = n] with N Poisson and Q_i truncated negative binomial.
fn bayes_conditional(alpha: f64, q: f64, z: f64, n: usize) -> Vec<f64> {
    let norm = 1.0 - (1.0 - q).powf(alpha);
    let ln_c = ln_gamma(alpha + 1.0) + (PI * alpha).sin().ln() - PI.ln() - norm.ln();
    let pq: Vec<f64> = (0..=n)
        .map(|x| if x == 0 { 0.0 } else { (ln_c + ln_gamma(x as f64 - alpha) - ln_gamma(x as f64 + 1.0) + x as f64 * q.ln()).exp() })
        .collect();
    let lambda = z * norm;
    let mut conv = vec![0.0; n + 1];
    conv[0] = 1.0;
    let mut joint = vec![0.0; n + 1];
    let mut poisson = (-lambda).exp();
    for k in 1..=n {
        let mut next = vec![0.0; n + 1];
        for s in 0..=n {
            for x in 1..=n - s {
                next[s + x] += conv[s] * pq[x];
            }
        }
        conv = next;
        poisson *= lambda / k as f64;
        joint[k] = poisson * conv[n];
    }
    let total: f64 = joint.iter().sum();
    joint.iter().map(|v| v / total).collect()
}

fn bayes_construction() -> Outcome {
    let mut worst: f64 = 0.0;
    for &alpha in &[0.2, 0.5, 0.8] {
        for &q in &[0.1, 0.5, 0.9] {
            for &z in &[0.3, 1.0, 4.0] {
                for n in 1..=15 {
                    let oracle = bayes_conditional(alpha, q, z, n);
                    let rho = pmf_rho(alpha, n, z).map_err(fail)?;
                    for k in 1..=n {
                        worst = worst.max((oracle[k] - rho.prob(k)).abs());
                    }
                }
            }
        }
    }
    check(worst < 1e-10, format!("max abs error {worst:.2e} (tol 1e-10)"))
}

fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let total = counts.iter().sum::<u64>() as f64;
    let mut cells = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        obs += c as f64;
        exp += p * total;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += obs;
        last.1 += exp;
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    1.0 - ChiSquared::new((cells.len() - 1) as f64).unwrap().cdf(stat)
}

fn mixture_representation() -> Outcome {
    let params = ModelParams::new(0.5, 1.0).map_err(fail)?;
    let exact = pmf_blocks(params, 5).map_err(fail)?;
    let spec = QuadratureSpec::default().with_rel_tol(1e-8);
    let mixed = pmf_blocks_by_mixture(params, 5, &spec).map_err(fail)?;
    let worst = (1..=5).map(|k| (mixed[k - 1] - exact.prob(k)).abs()).fold(0.0, f64::max);

    let n = 10;
    let sampler = RepresentationSampler::new(params, n).map_err(fail)?;
    let draws = (0..100_000u64)
        .into_par_iter()
        .map(|i| sampler.sample(&mut SeedSpec::new(2, i).rng()))
        .collect::<Result<Vec<usize>, _>>()
        .map_err(fail)?;
    let mut counts = vec![0u64; n + 1];
    for d in draws {
        counts[d] += 1;
    }
    let target = pmf_blocks(params, n).map_err(fail)?;
    let probs: Vec<f64> = (0..=n).map(|k| target.prob(k)).collect();
    let p = chi_square_p_value(&counts, &probs);
    check(worst < 1e-6 && p > 0.01, format!("mixture max error {worst:.2e} (tol 1e-6); sampler chi2 p = {p:.3} (> 0.01)"))
}

fn poisson_limit() -> Outcome {
    let mut tvs = Vec::new();
    for &n in &[100, 1000, 10_000] {
        let rho = pmf_rho(0.5, n, 1.0).map_err(fail)?;
        tvs.push(rho.total_variation(&pmf_rho_limit(1.0, n).map_err(fail)?));
    }
    let decreasing = tvs.windows(2).all(|w| w[1] < w[0]);
    check(decreasing && tvs[2] < 0.02, format!("TV {:.4e}, {:.4e}, {:.4e} (decreasing, last < 0.02)", tvs[0], tvs[1], tvs[2]))
}

fn half_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for &x in &[0.05f64, 0.2, 1.0, 4.0, 30.0] {
        let levy = (-1.0 / (4.0 * x)).exp() / (2.0 * PI.sqrt() * x.powf(1.5));
        worst = worst.max((stable_density(0.5, x).map_err(fail)? - levy).abs());
    }
    let params = ModelParams::new(0.5, 0.0).map_err(fail)?;
    let law = MittagLefflerLaw::new(params);
    for &s in &[0.1f64, 0.5, 1.0, 2.0, 5.0] {
        worst = worst.max((law.density(s).map_err(fail)? - (-s * s / 4.0).exp() / PI.sqrt()).abs());
        let cdf = libm::erf(s / 2.0);
        worst = worst.max((law.cdf(s).map_err(fail)? - cdf).abs());
        worst = worst.max((law.quantile(cdf).map_err(fail)? - s).abs() / s.max(1.0));
    }
    let sampler = MlSampler::new(params).map_err(fail)?;
    let n = 100_000;
    let draws = (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.sample(&mut SeedSpec::new(6, i).rng()))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(fail)?;
    let mean = draws.iter().sum::<f64>() / n as f64;
    let se = (draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt();
    let z = (mean - 2.0 / PI.sqrt()) / se;
    check(worst < 1e-7 && z.abs() < 3.0, format!("max analytic error {worst:.2e} (tol 1e-7); sampler mean off by {z:.2} SE"))
}

fn laplace_check() -> Outcome {
    let mut gaps = Vec::new();
    for &n in &[20, 50, 100, 200] {
        gaps.push(laplace_integral(0.5, n, 1.0).map_err(fail)?.relative_gap());
    }
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    check(
        decreasing && gaps[3] < 0.02,
        format!("gaps {} (decreasing, last < 0.02)", gaps.iter().map(|g| format!("{g:.4e}")).collect::<Vec<_>>().join(", ")),
    )
}

fn prior_rate() -> Outcome {
    let grid = [16, 64, 256, 1024, 4096];
    let mut ok = true;
    let mut detail = Vec::new();
    for &(alpha, lo, hi) in &[(0.5, -0.65, -0.35), (0.3, -0.45, -0.15)] {
        let report = rate_experiment_prior(ModelParams::new(alpha, 6.0).map_err(fail)?, &grid).map_err(fail)?;
        ok &= report.within(lo, hi, 10.0);
        detail.push(format!(
            "alpha={alpha}: slope {:.4} in [{lo}, {hi}], ratio {:.3} <= 10",
            report.fitted_slope,
            report.scaled_ratio()
        ));
    }
    check(ok, detail.join("; "))
}

fn posterior_routes() -> Outcome {
    let ctx = PosteriorContext::new(ModelParams::new(0.5, 1.0).map_err(fail)?, 10, 4).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for m in 1..=12 {
        let a = pmf_unseen(&ctx, m, UnseenRoute::Noncentral).map_err(fail)?;
        let b = pmf_unseen(&ctx, m, UnseenRoute::Mixture).map_err(fail)?;
        for k in 0..=m {
            worst = worst.max((a.prob(k) - b.prob(k)).abs());
        }
    }
    check(worst < 1e-10, format!("max abs difference {worst:.2e} (tol 1e-10)"))
}

fn posterior_rate() -> Outcome {
    let ctx = PosteriorContext::new(ModelParams::new(0.5, 1.0).map_err(fail)?, 10, 4).map_err(fail)?;
    let report = rate_experiment_posterior(&ctx, &[16, 64, 256, 1024]).map_err(fail)?;
    check(
        report.within(-0.65, -0.35, 10.0),
        format!("slope {:.4} in [-0.65, -0.35], ratio {:.3} <= 10", report.fitted_slope, report.scaled_ratio()),
    )
}

fn inference_recovery() -> Outcome {
    let params = ModelParams::new(0.5, 2.0).map_err(fail)?;
    let mut alphas = Vec::new();
    for seed in 0..10 {
        let part = sample_partition(params, 5000, &mut SeedSpec::new(seed, 0).rng()).map_err(fail)?;
        alphas.push(fit_eppf(&SpeciesSample::from_partition(&part), FitBox::default()).map_err(fail)?.params.alpha());
    }
    let hits = alphas.iter().filter(|a| (0.45..=0.55).contains(*a)).count();
    check(hits >= 9, format!("{hits}/10 fitted alpha in [0.45, 0.55] (need 9)"))
}

fn cli_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("pitman-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(fail)?;
    let input = dir.join("labels.txt");
    let labels: String = (0..400).map(|i| format!("sp{}\n", (i * i + 7 * i) % 53)).collect();
    std::fs::write(&input, labels).map_err(fail)?;
    let input = input.to_str().unwrap().to_string();
    let invocations: Vec<Vec<&str>> = vec![
        vec!["pmf", "--law", "blocks", "--alpha", "0.5", "--theta", "1", "--n", "50"],
        vec!["pmf", "--law", "unseen", "--alpha", "0.5", "--theta", "1", "--n", "10", "--j", "4", "--m", "40"],
        vec!["sample", "--what", "partition", "--alpha", "0.4", "--theta", "1", "--n", "100", "--reps", "200"],
        vec!["sample", "--what", "ml", "--alpha", "0.3", "--theta", "2", "--reps", "2000"],
        vec!["sample", "--what", "posterior-diversity", "--alpha", "0.5", "--theta", "1", "--n", "10", "--j", "4", "--reps", "2000"],
        vec!["fit", "--input", &input],
        vec!["rate", "--mode", "prior", "--alpha", "0.5", "--theta", "6", "--grid", "16,64,256"],
        vec!["predict", "--alpha", "0.5", "--theta", "1", "--n", "10", "--j", "4", "--m", "100000", "--reps", "2000"],
    ];
    let run = |args: &[&str], threads: &str| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_pitman"))
            .args(args)
            .args(["--seed", "17", "--threads", threads])
            .output()
            .map_err(fail)?;
        if !out.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        Ok(out.stdout)
    };
    let mut mismatches = Vec::new();
    for args in &invocations {
        let first = run(args, "1")?;
        if run(args, "1")? != first || run(args, "4")? != first {
            mismatches.push(args[0]);
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(
        mismatches.is_empty(),
        format!("{} invocations byte-identical across reruns and --threads 1/4; mismatches: {mismatches:?}", invocations.len()),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("coefficient correctness", Duration::from_secs(5), coefficient_correctness),
        ("block-count law vs partition enumeration", Duration::from_secs(10), enumeration_consistency),
        ("conditional block count vs Bayes construction", Duration::from_secs(30), bayes_construction),
        ("mixture and representation sampler", Duration::from_secs(120), mixture_representation),
        ("shifted Poisson limit", Duration::from_secs(60), poisson_limit),
        ("alpha = 1/2 closed forms", Duration::from_secs(60), half_closed_forms),
        ("Laplace approximation", Duration::from_secs(30), laplace_check),
        ("prior Kolmogorov rate", Duration::from_secs(600), prior_rate),
        ("posterior routes agree", Duration::from_secs(10), posterior_routes),
        ("posterior Kolmogorov rate", Duration::from_secs(600), posterior_rate),
        ("inference recovery", Duration::from_secs(120), inference_recovery),
        ("CLI determinism", Duration::from_secs(600), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {detail}; {:.2}s (budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
