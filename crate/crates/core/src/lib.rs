// Negated comparisons such as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod berry_esseen;
pub mod error;
pub mod inference;
pub mod partition_laws;
pub mod quad;
pub mod samplers;
pub mod specfun;
pub mod stable;

pub use berry_esseen::{RateMode, RateReport, RateRow};
pub use error::{Error, Result};
pub use inference::{FitResult, SpeciesSample, UnseenEstimate};
pub use partition_laws::{LogPmf, Partition, PosteriorContext, UnseenRoute};
pub use quad::QuadratureSpec;
pub use samplers::SeedSpec;
pub use specfun::ModelParams;
