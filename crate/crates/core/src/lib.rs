//! Bayesian restricted mean survival time (RMST) for parametric survival
//! models.
//!
//! The crate evaluates closed-form RMSTs for the exponential, Weibull,
//! log-logistic and log-normal families (optionally conditioned on a cluster
//! random effect or gamma frailty), fits the corresponding censored-data
//! posteriors with an adaptive random-walk Metropolis sampler, and turns the
//! posterior draws into RMST distributions and their summaries.
//!
//! The closed-form layer ([`specfun`], [`families`], [`rmst`],
//! [`summaries`]) is generic over the scalar type through [`Real`]; the
//! aliases below pin it to `f64` for everyday use. Likelihoods, sampling and
//! simulation work in `f64`.

pub mod data;
pub mod diagnostics;
mod error;
pub mod families;
pub mod inference;
pub mod quadrature;
pub mod rmst;
mod scalar;
pub mod sampler;
pub mod seeds;
pub mod simulation;
pub mod specfun;
pub mod summaries;
pub mod waic;

pub use error::{Error, Result};
pub use scalar::{lit, Real};

pub use data::SurvivalDataset;
pub use families::{AltFamilyParams, Effect, Family};
pub use inference::{EffectKind, ModelSpec, ParamLayout, Priors};
pub use rmst::{ClusterSelector, RmstDistribution, RmstQuery};
pub use sampler::{PosteriorDraws, SamplerConfig};
pub use simulation::{Scenario, ScenarioConfig, SimMetrics};
pub use waic::WaicResult;

/// Family parameters in double precision.
pub type FamilyParams = families::FamilyParams<f64>;
/// Family parameters in single precision.
pub type FamilyParams32 = families::FamilyParams<f32>;
/// Conditioning effect in double precision.
pub type EffectValue = families::Effect<f64>;
/// Sorted-sample summary in double precision.
pub type RmstSummary = summaries::RmstSummary<f64>;
/// Per-draw RMST vector in double precision.
pub type RmstSampleVector = rmst::RmstSampleVector<f64>;
