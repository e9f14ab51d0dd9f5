//! Positive α-stable density, Pitman's α-diversity law and the Laplace-type
//! integral that links them to the block-count coefficients.

mod density;
mod laplace;
mod mittag_leffler;

pub use density::{levy_density, stable_density, StableDensitySpec};
pub use laplace::{laplace_integral, laplace_integral_with, log_laplace_moment, LaplaceIntegral};
pub use mittag_leffler::{
    ml_cdf, ml_density, ml_mean_closed_form, ml_neg_moment, ml_quantile, CdfGrid, MittagLefflerLaw,
};
