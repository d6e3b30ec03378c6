//! The per-OER feature vector X, the learner preference vector P, how P is
//! initialized and learned from ratings, and how it selects recommendations.

mod coldstart;
mod learn;
mod recommend;
mod vector;

pub use coldstart::{init_preference, jaccard, peer_similarity, ColdStartConfig, ContextWeights};
pub use learn::{loss, update_preference, TrainingHistory, UpdateOutcome, UpdateParams};
pub use recommend::{
    best_candidate, best_towards, candidates, recommend, recommend_at_level, recommend_towards, Recommendation,
};
pub use vector::{
    build_feature_vector, CorpusStats, FeatureVector, Imputed, LengthRange, PreferenceVector, COMPONENT_NAMES, DIM,
    LENGTH, NEUTRAL, QUALITY_META, QUALITY_PROP, RATE, SKILL_SIMILARITY, SOURCE_OFFSET,
};
