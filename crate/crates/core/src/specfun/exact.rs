//! Exact rational evaluation of generalized factorial coefficients by their
//! alternating-sum definition.
//!
//! Every `f64` is a dyadic rational, so the parameters enter exactly and the
//! only rounding happens in the final conversion. The alternating sum cancels
//! catastrophically in floating point; here it does not cancel at all.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Converts a finite `f64` to an exact rational.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// 𝒞(n, k; s, r) = (1/k!) Σ_{i=0}^{k} (−1)^i C(k,i) [−i·s − r]_(n,1), exactly.
pub fn gfc_exact(n: usize, k: usize, s: &BigRational, r: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    let mut binom = BigInt::one();
    for i in 0..=k {
        let start = -(s * BigRational::from_integer(BigInt::from(i))) - r;
        let mut prod = BigRational::one();
        for t in 0..n {
            prod *= &start + BigRational::from_integer(BigInt::from(t));
        }
        let term = BigRational::from_integer(binom.clone()) * prod;
        if i % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        binom = binom * BigInt::from(k - i) / BigInt::from(i + 1);
    }
    let mut k_fact = BigInt::one();
    for i in 2..=k {
        k_fact *= BigInt::from(i);
    }
    total / BigRational::from_integer(k_fact)
}

/// Convenience wrapper returning the coefficient as `f64` (`None` when it is
/// not strictly positive).
pub fn gfc_exact_f64(n: usize, k: usize, alpha: f64, shift: f64) -> Option<f64> {
    let value = gfc_exact(n, k, &rational(alpha), &rational(shift));
    if value.is_positive() {
        value.to_f64()
    } else {
        None
    }
}

/// Sign of the exact coefficient: −1, 0 or +1.
pub fn gfc_exact_sign(n: usize, k: usize, alpha: f64, shift: f64) -> i8 {
    let value = gfc_exact(n, k, &rational(alpha), &rational(shift));
    if value.is_zero() {
        0
    } else if value.is_positive() {
        1
    } else {
        -1
    }
}
