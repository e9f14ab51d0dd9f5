use std::f64::consts::PI;

use pitman_core::quad::{integrate_breaks, QuadratureSpec};
use pitman_core::stable::{laplace_integral, levy_density, ml_mean_closed_form, stable_density, MittagLefflerLaw};
use pitman_core::ModelParams;
use proptest::prelude::*;

#[test]
fn half_stable_density_is_levy() {
    for &x in &[0.02f64, 0.1, 0.3, 1.0, 3.0, 10.0, 100.0] {
        // f_{1/2}(x) = x^{−3/2} e^{−1/(4x)} / (2√π)
        let want = (-1.0 / (4.0 * x)).exp() / (2.0 * PI.sqrt() * x.powf(1.5));
        assert!((levy_density(x) - want).abs() < 1e-15 * want.max(1.0));
        let got = stable_density(0.5, x).unwrap();
        assert!((got - want).abs() < 1e-7 * want.max(1e-300).max(1.0), "x={x}: {got} vs {want}");
    }
}

#[test]
fn half_mittag_leffler_is_half_normal() {
    let law = MittagLefflerLaw::new(ModelParams::new(0.5, 0.0).unwrap());
    for &s in &[0.05f64, 0.4, 1.0, 2.5, 6.0] {
        let density = (-s * s / 4.0).exp() / PI.sqrt();
        assert!((law.density(s).unwrap() - density).abs() < 1e-7);
        let cdf = libm::erf(s / 2.0);
        assert!((law.cdf(s).unwrap() - cdf).abs() < 1e-7);
        assert!((law.quantile(cdf).unwrap() - s).abs() < 1e-7 * s.max(1.0));
    }
    assert!((ml_mean_closed_form(law.params()) - 2.0 / PI.sqrt()).abs() < 1e-14);
}

#[test]
fn mittag_leffler_density_normalizes() {
    for &(alpha, theta) in &[(0.3, 2.0), (0.5, 1.0), (0.7, -0.4), (0.2, 6.0)] {
        let law = MittagLefflerLaw::new(ModelParams::new(alpha, theta).unwrap());
        let mean = ml_mean_closed_form(law.params());
        let c = mean.ln();
        let points: Vec<f64> = [-120.0, -60.0, -30.0, -12.0, -5.0, -2.0, -1.0, 0.0, 0.5, 1.0, 1.5, 2.5, 4.0].iter().map(|o| c + o).collect();
        let spec = QuadratureSpec::default().with_rel_tol(1e-10);
        let total = integrate_breaks(|y: f64| law.density(y.exp()).unwrap() * y.exp(), &points, &spec).unwrap().value;
        assert!((total - 1.0).abs() < 1e-7, "({alpha},{theta}): {total}");
        let first = integrate_breaks(|y: f64| law.density(y.exp()).unwrap() * (2.0 * y).exp(), &points, &spec).unwrap().value;
        assert!((first / mean - 1.0).abs() < 1e-7, "({alpha},{theta}): mean {first} vs {mean}");
    }
}

#[test]
fn laplace_approximation_improves_with_order() {
    let mut prev = f64::INFINITY;
    for &n in &[20, 50, 100, 200] {
        let gap = laplace_integral(0.5, n, 1.0).unwrap().relative_gap();
        assert!(gap < prev, "n={n}: {gap} !< {prev}");
        prev = gap;
    }
    assert!(prev < 0.02, "{prev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cdf_is_monotone_and_inverts(alpha in 0.1f64..0.9, t in 0.05f64..10.0, p in 0.01f64..0.99) {
        let law = MittagLefflerLaw::new(ModelParams::new(alpha, t - alpha).unwrap());
        let x = law.quantile(p).unwrap();
        prop_assert!((law.cdf(x).unwrap() - p).abs() < 1e-8);
        let lower = law.cdf(0.9 * x).unwrap();
        let upper = law.cdf(1.1 * x).unwrap();
        prop_assert!(lower <= p && p <= upper);
    }
}
