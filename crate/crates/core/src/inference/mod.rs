//! Species-sample ingestion, maximum-likelihood fitting of (α, θ) and
//! prediction of unseen species.

mod fit;
mod ingest;
mod predict;

pub use fit::{fit_eppf, FitBox, FitResult};
pub use ingest::{ingest, ingest_reader, InputFormat, SpeciesSample};
pub use predict::{predict_unseen, EstimateMode, PredictMode, PredictOptions, UnseenEstimate, DEFAULT_EXACT_LIMIT};
