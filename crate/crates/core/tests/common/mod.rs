#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson χ² p-value of `counts` against cell probabilities `probs`.
/// Adjacent cells are pooled until each expects at least five draws.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let total = total as f64;
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
    // Leftover tail mass, including anything outside the listed cells.
    let listed: f64 = probs.iter().sum();
    exp += (1.0 - listed).max(0.0) * total;
    if let Some(last) = cells.last_mut() {
        last.0 += obs;
        last.1 += exp;
    }
    assert!(cells.len() >= 2, "too few cells for a χ² test");
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// One-sample Kolmogorov-Smirnov statistic of `draws` against `cdf`.
pub fn ks_statistic(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    draws.sort_by(f64::total_cmp);
    let n = draws.len() as f64;
    draws
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Histogram of draws on {0..len}.
pub fn histogram(draws: impl IntoIterator<Item = usize>, len: usize) -> Vec<u64> {
    let mut counts = vec![0u64; len];
    for d in draws {
        counts[d.min(len - 1)] += 1;
    }
    counts
}
