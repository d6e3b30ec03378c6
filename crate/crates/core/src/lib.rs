//! Skill-targeted recommendation of open educational resources.
//!
//! Records are quality-controlled with random forests, described by a feature
//! vector X, and matched against a per-learner preference vector P that is
//! learned from satisfaction ratings. The numeric core is generic over the
//! scalar type; the aliases below fix it to `f64`.

// NaN must fail range checks, so comparisons are written negated on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embeddings;
pub mod error;
pub mod fsutil;
pub mod ingest;
pub mod market;
pub mod model;
pub mod normalize;
pub mod preference;
pub mod quality;
pub mod scalar;
pub mod synthetic;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type FeatureVectorF64 = preference::FeatureVector<f64>;
pub type PreferenceVectorF64 = preference::PreferenceVector<f64>;
pub type ForestF64 = quality::ForestModel<f64>;
pub type RegistryF64 = quality::ModelRegistry<f64>;
pub type QualityModelsF64 = quality::QualityModels<f64>;
pub type EmbeddingsF64 = embeddings::EmbeddingTable<f64>;
pub type TrainingHistoryF64 = preference::TrainingHistory<f64>;
