//! Initial preference vector for a new learner, averaged from similar learners.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::vector::{PreferenceVector, DIM};
use crate::error::{Error, Result};
use crate::model::LearnerProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContextWeights {
    pub country: f64,
    pub city: f64,
    /// Weight of the Jaccard overlap of job-experience skills.
    pub job_skills: f64,
}

impl Default for ContextWeights {
    fn default() -> Self {
        ContextWeights { country: 0.4, city: 0.2, job_skills: 0.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColdStartConfig {
    /// At most this many peers are averaged.
    pub k: usize,
    /// Minimum similarity for a peer to count.
    pub threshold: f64,
    pub weights: ContextWeights,
}

impl Default for ColdStartConfig {
    fn default() -> Self {
        ColdStartConfig { k: 10, threshold: 0.5, weights: ContextWeights::default() }
    }
}

impl ColdStartConfig {
    pub fn validate(&self) -> Result<()> {
        let w = self.weights;
        if [w.country, w.city, w.job_skills].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("coldstart.weights must be non-negative".into()));
        }
        Ok(())
    }
}

fn same(a: &str, b: &str) -> bool {
    let a = a.trim();
    !a.is_empty() && a.to_lowercase() == b.trim().to_lowercase()
}

/// Jaccard index of two sets; zero when both are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Context similarity between two learners.
pub fn peer_similarity(a: &LearnerProfile, b: &LearnerProfile, w: &ContextWeights) -> f64 {
    let country = if same(&a.country, &b.country) { w.country } else { 0.0 };
    let city = if same(&a.city, &b.city) { w.city } else { 0.0 };
    country + city + w.job_skills * jaccard(&a.experience_skills(), &b.experience_skills())
}

/// Mean preference of the `k` most similar peers at or above the threshold,
/// or the neutral vector when none qualify. The learner itself is never its own peer.
pub fn init_preference(
    learner: &LearnerProfile,
    peers: &[LearnerProfile],
    config: &ColdStartConfig,
) -> PreferenceVector<f64> {
    let mut scored: Vec<(f64, &LearnerProfile)> = peers
        .iter()
        .filter(|p| p.id != learner.id)
        .map(|p| (peer_similarity(learner, p, &config.weights), p))
        .filter(|(s, _)| *s >= config.threshold)
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.id.cmp(&b.1.id)));
    scored.truncate(config.k);
    if scored.is_empty() {
        return PreferenceVector::neutral();
    }
    let mut mean = [0.0; DIM];
    for (_, p) in &scored {
        for (m, v) in mean.iter_mut().zip(p.preference.values()) {
            *m += v;
        }
    }
    let n = scored.len() as f64;
    PreferenceVector::clamped(mean.map(|m| m / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExpertiseLevel, JobExperience, SkillLevel};
    use chrono::NaiveDate;

    pub(crate) fn learner(id: &str, country: &str, city: &str, skills: &[&str], p: f64) -> LearnerProfile {
        LearnerProfile {
            id: id.into(),
            external_id: None,
            country: country.into(),
            city: city.into(),
            birth_date: NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
            gender: None,
            job_experiences: vec![JobExperience {
                title: "analyst".into(),
                industry: "J62".into(),
                skills: skills.iter().map(|s| SkillLevel::new(*s, ExpertiseLevel::Intermediate)).collect(),
            }],
            goals: Default::default(),
            preference: PreferenceVector::uniform(p),
        }
    }

    #[test]
    fn no_peers_is_neutral() {
        let me = learner("me", "DE", "Berlin", &["sql"], 0.5);
        assert_eq!(init_preference(&me, &[], &ColdStartConfig::default()), PreferenceVector::neutral());
    }

    #[test]
    fn mean_of_qualifying_peers() {
        let me = learner("me", "DE", "Berlin", &["sql"], 0.5);
        let peers = [
            learner("a", "DE", "Berlin", &[], 0.2),
            learner("b", "de", "berlin", &["python"], 0.4),
            learner("c", "FR", "Paris", &["sql"], 0.9),
        ];
        let p = init_preference(&me, &peers, &ColdStartConfig::default());
        for v in p.values() {
            assert!((v - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn similarity_formula() {
        let a = learner("a", "DE", "Berlin", &["sql", "python"], 0.5);
        let b = learner("b", "DE", "Hamburg", &["python", "r"], 0.5);
        let w = ContextWeights::default();
        assert!((peer_similarity(&a, &b, &w) - (0.4 + 0.4 / 3.0)).abs() < 1e-12);
        let empty = learner("e", "", "", &[], 0.5);
        assert_eq!(peer_similarity(&empty, &empty.clone(), &w), 0.0);
    }

    #[test]
    fn top_k_by_similarity() {
        let me = learner("me", "DE", "Berlin", &["sql"], 0.5);
        let peers = [learner("near", "DE", "Berlin", &["sql"], 1.0), learner("mid", "DE", "Berlin", &[], 0.0)];
        let cfg = ColdStartConfig { k: 1, ..Default::default() };
        assert_eq!(init_preference(&me, &peers, &cfg), PreferenceVector::uniform(1.0));
    }
}
