//! Bayesian paired-comparison models.
//!
//! Bradley-Terry and Davidson (ties) models with order effects, player
//! predictors, subject random effects and subject-specific predictors, fitted
//! with a No-U-Turn sampler. Fits can be summarized into parameter, rank and
//! win-probability tables, checked for convergence and compared with WAIC and
//! PSIS-LOO.

pub mod error;
pub mod model;

pub use error::{Error, ErrorCategory, Result};
pub use model::{
    build_model, BaseModel, CompiledModel, Contest, ContestDataset, ContestRecord, Extension, ModelSpec, Outcome,
    Priors,
};
pub mod sampler;

pub use sampler::{sample, PosteriorFit, SamplerConfig};
pub mod diagnostics;
pub mod posterior;
pub mod table;

pub use posterior::{summarize, IntervalSpec};
pub mod comparison;
pub mod io;
