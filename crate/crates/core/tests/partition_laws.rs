#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use pitman_core::partition_laws::{
    mixing_density, pmf_blocks, pmf_blocks_by_mixture, pmf_esf, pmf_rho, pmf_rho_limit,
};
use pitman_core::quad::{integrate_breaks, QuadratureSpec};
use pitman_core::specfun::{gfc_row, ln_gamma};
use pitman_core::stable::laplace_integral;
use pitman_core::{ModelParams, Partition};

/// All integer partitions of n as multiplicity vectors.
fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current[part - 1] += 1;
            rec(remaining - part, part, current, out);
            current[part - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut vec![0; n], &mut out);
    out
}

#[test]
fn sampling_formula_aggregates_to_block_count_law() {
    for &(alpha, theta) in &[(0.5, 1.0), (0.25, -0.2), (0.8, 3.0)] {
        let params = ModelParams::new(alpha, theta).unwrap();
        for n in 1..=8 {
            let blocks = pmf_blocks(params, n).unwrap();
            let mut by_j = vec![0.0; n + 1];
            for mult in integer_partitions(n) {
                let p = Partition::new(n, mult).unwrap();
                by_j[p.num_blocks()] += pmf_esf(params, &p).unwrap().exp();
            }
            let total: f64 = by_j.iter().sum();
            assert!((total - 1.0).abs() < 1e-10, "n={n}: {total}");
            for k in 1..=n {
                assert!((by_j[k] - blocks.prob(k)).abs() < 1e-10, "({alpha},{theta}) n={n} k={k}");
            }
        }
    }
}

#[test]
fn partition_count_of_six_sums_to_one() {
    let params = ModelParams::new(0.5, 1.0).unwrap();
    let parts = integer_partitions(6);
    assert_eq!(parts.len(), 11);
    let total: f64 = parts
        .into_iter()
        .map(|m| pmf_esf(params, &Partition::new(6, m).unwrap()).unwrap().exp())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
}

/// P[Q = x] = Γ(α+1) sin(πα)/π · Γ(x−α)/x! · q^x / (1 − (1−q)^α).
fn truncated_enb_pmf(alpha: f64, q: f64, x_max: usize) -> Vec<f64> {
    let norm = 1.0 - (1.0 - q).powf(alpha);
    let ln_c = ln_gamma(alpha + 1.0) + (PI * alpha).sin().ln() - PI.ln() - norm.ln();
    (0..=x_max)
        .map(|x| {
            if x == 0 {
                0.0
            } else {
                (ln_c + ln_gamma(x as f64 - alpha) - ln_gamma(x as f64 + 1.0) + x as f64 * q.ln()).exp()
            }
        })
        .collect()
}

/// Bayes construction: P[N = k | Σ_{i ≤ N} Q_i = n] by convolution. Terms
/// with k > n vanish because every Q_i ≥ 1.
fn bayes_conditional(alpha: f64, q: f64, z: f64, n: usize) -> Vec<f64> {
    let pq = truncated_enb_pmf(alpha, q, n);
    let lambda = z * (1.0 - (1.0 - q).powf(alpha));
    let mut conv = vec![0.0; n + 1];
    conv[0] = 1.0;
    let mut joint = vec![0.0; n + 1];
    let mut poisson = (-lambda).exp();
    for k in 1..=n {
        let mut next = vec![0.0; n + 1];
        for s in 0..=n {
            if conv[s] == 0.0 {
                continue;
            }
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

#[test]
fn rho_matches_bayes_construction() {
    for &alpha in &[0.2, 0.5, 0.8] {
        for &q in &[0.1, 0.5, 0.9] {
            for &z in &[0.3, 1.0, 4.0] {
                for n in 1..=15 {
                    let oracle = bayes_conditional(alpha, q, z, n);
                    let rho = pmf_rho(alpha, n, z).unwrap();
                    for k in 1..=n {
                        assert!(
                            (oracle[k] - rho.prob(k)).abs() < 1e-10,
                            "alpha={alpha} q={q} z={z} n={n} k={k}: {} vs {}",
                            oracle[k],
                            rho.prob(k)
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn rho_specific_instance() {
    let oracle = bayes_conditional(0.4, 0.35, 0.7, 6);
    let rho = pmf_rho(0.4, 6, 0.7).unwrap();
    for k in 1..=6 {
        assert!((oracle[k] - rho.prob(k)).abs() < 1e-10);
    }
}

#[test]
fn rho_approaches_shifted_poisson() {
    let mut prev = f64::INFINITY;
    for &n in &[100, 1000, 10_000] {
        let rho = pmf_rho(0.5, n, 1.0).unwrap();
        let tv = rho.total_variation(&pmf_rho_limit(1.0, n).unwrap());
        assert!(tv < prev, "n={n}: {tv} !< {prev}");
        prev = tv;
    }
    assert!(prev < 0.02, "{prev}");
}

#[test]
fn coefficient_row_matches_laplace_identity() {
    // Σ_j 𝒞(n,j;α) z^j = e^z z^{n/α} ∫ x^n e^{−x z^{1/α}} f_α(x) dx, with the
    // integral written as I_n(z^{1/α}/n).
    let alpha = 0.5;
    for n in 1..=10 {
        let row = gfc_row(alpha, n, 0.0).unwrap();
        for &z in &[0.5f64, 1.0, 2.0] {
            let lhs: f64 = (1..=n).map(|j| (row[j] + j as f64 * z.ln()).exp()).sum();
            let w = z.powf(1.0 / alpha);
            let integral = laplace_integral(alpha, n, w / n as f64).unwrap().value();
            let rhs = z.exp() * z.powf(n as f64 / alpha) * integral;
            assert!((lhs / rhs - 1.0).abs() < 1e-6, "n={n} z={z}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn mixing_density_normalizes() {
    let params = ModelParams::new(0.5, 1.0).unwrap();
    let center = 0.5 * 6f64.ln();
    let points: Vec<f64> = [-40.0, -20.0, -8.0, -3.0, -1.0, 0.0, 1.0, 2.0, 4.0, 7.0].iter().map(|o| center + o).collect();
    let spec = QuadratureSpec::default().with_rel_tol(1e-9);
    let total = integrate_breaks(|y: f64| mixing_density(params, 5, y.exp()).unwrap() * y.exp(), &points, &spec)
        .unwrap()
        .value;
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn mixture_reproduces_block_count_law() {
    for &(alpha, theta) in &[(0.5, 1.0), (0.4, -0.2)] {
        let params = ModelParams::new(alpha, theta).unwrap();
        let spec = QuadratureSpec::default().with_rel_tol(1e-8);
        let n = 5;
        let mixed = pmf_blocks_by_mixture(params, n, &spec).unwrap();
        let exact = pmf_blocks(params, n).unwrap();
        for k in 1..=n {
            assert!((mixed[k - 1] - exact.prob(k)).abs() < 1e-6, "({alpha},{theta}) k={k}");
        }
    }
}
