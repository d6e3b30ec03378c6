use std::cmp::Ordering;
use std::collections::HashSet;

use super::vector::{build_feature_vector, CorpusStats, FeatureVector, PreferenceVector};
use crate::embeddings::cosine_similarity;
use crate::error::{Error, Result};
use crate::model::{ExpertiseLevel, LearnerProfile, OerRecord};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation<'a, T> {
    pub oer: &'a OerRecord,
    pub feature_vector: FeatureVector<T>,
    /// Cosine similarity between the OER's X and the learner's P.
    pub score: T,
}

/// `Less` when `a` should be recommended before `b`: higher cosine, then higher
/// lower-of-two quality score, then smaller id.
fn rank<T: Scalar>(a: &Recommendation<'_, T>, b: &Recommendation<'_, T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| b.oer.min_quality().total_cmp(&a.oer.min_quality()))
        .then_with(|| a.oer.id.cmp(&b.oer.id))
}

/// Best candidate for `p` among already-built feature vectors.
pub fn best_candidate<'a, T: Scalar>(
    p: &PreferenceVector<T>,
    candidates: impl IntoIterator<Item = (&'a OerRecord, FeatureVector<T>)>,
) -> Option<Recommendation<'a, T>> {
    best_towards(p.as_slice(), candidates)
}

/// Best candidate by cosine against any direction, not only a vector in [0,1].
pub fn best_towards<'a, T: Scalar>(
    direction: &[T],
    candidates: impl IntoIterator<Item = (&'a OerRecord, FeatureVector<T>)>,
) -> Option<Recommendation<'a, T>> {
    candidates
        .into_iter()
        .map(|(oer, x)| {
            let score = cosine_similarity(&x.values, direction).unwrap_or_else(|_| T::zero());
            Recommendation { oer, feature_vector: x, score }
        })
        .min_by(rank)
}

/// Candidates for `skill` at `level` not in `exclusions`.
pub fn candidates<'a: 'b, 'b>(
    corpus: &'a [OerRecord],
    skill: &'b str,
    level: ExpertiseLevel,
    exclusions: &'b HashSet<String>,
) -> impl Iterator<Item = &'a OerRecord> + 'b {
    corpus.iter().filter(move |o| o.target_skill == skill && o.level == level && !exclusions.contains(&o.id))
}

/// OER whose feature vector points closest to the learner's preference, among
/// the unexcluded OERs for `skill` at the learner's current level.
pub fn recommend<'a, T: Scalar>(
    learner: &LearnerProfile,
    skill: &str,
    corpus: &'a [OerRecord],
    stats: &CorpusStats,
    exclusions: &HashSet<String>,
) -> Result<Recommendation<'a, T>> {
    let level = learner
        .goals
        .level_for(skill)
        .ok_or_else(|| Error::validation("skill", format!("`{skill}` is not among the learner's goals")))?;
    recommend_at_level(&learner.preference.cast(), skill, level, corpus, stats, exclusions)
}

pub fn recommend_at_level<'a, T: Scalar>(
    p: &PreferenceVector<T>,
    skill: &str,
    level: ExpertiseLevel,
    corpus: &'a [OerRecord],
    stats: &CorpusStats,
    exclusions: &HashSet<String>,
) -> Result<Recommendation<'a, T>> {
    recommend_towards(p.as_slice(), skill, level, corpus, stats, exclusions)
}

/// [`recommend_at_level`] for an arbitrary ranking direction.
pub fn recommend_towards<'a, T: Scalar>(
    direction: &[T],
    skill: &str,
    level: ExpertiseLevel,
    corpus: &'a [OerRecord],
    stats: &CorpusStats,
    exclusions: &HashSet<String>,
) -> Result<Recommendation<'a, T>> {
    let built = candidates(corpus, skill, level, exclusions)
        .map(|o| build_feature_vector(o, stats).map(|x| (o, x)))
        .collect::<Result<Vec<_>>>()?;
    best_towards(direction, built).ok_or_else(|| Error::LevelExhausted { skill: skill.to_string(), level })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SourceRepository;

    fn oer(id: &str, level: ExpertiseLevel, src: SourceRepository, q: (f64, f64)) -> OerRecord {
        let mut r = OerRecord::new(id, src, "t", "sql", level, "u");
        r.quality_meta = Some(q.0);
        r.quality_prop = Some(q.1);
        r
    }

    #[test]
    fn single_candidate() {
        let corpus = vec![oer("a", ExpertiseLevel::Beginner, SourceRepository::Youtube, (0.6, 0.6))];
        let p = PreferenceVector::<f64>::neutral();
        let r =
            recommend_at_level(&p, "sql", ExpertiseLevel::Beginner, &corpus, &CorpusStats::default(), &HashSet::new())
                .unwrap();
        assert_eq!(r.oer.id, "a");
    }

    #[test]
    fn level_and_exclusions_filter() {
        let corpus = vec![
            oer("a", ExpertiseLevel::Beginner, SourceRepository::Youtube, (0.6, 0.6)),
            oer("b", ExpertiseLevel::Advanced, SourceRepository::Youtube, (0.9, 0.9)),
        ];
        let p = PreferenceVector::<f64>::neutral();
        let stats = CorpusStats::default();
        let excl: HashSet<String> = ["a".to_string()].into();
        let err = recommend_at_level(&p, "sql", ExpertiseLevel::Beginner, &corpus, &stats, &excl).unwrap_err();
        assert!(matches!(err, Error::LevelExhausted { level: ExpertiseLevel::Beginner, .. }));
        let r = recommend_at_level(&p, "sql", ExpertiseLevel::Advanced, &corpus, &stats, &excl).unwrap();
        assert_eq!(r.oer.id, "b");
    }

    #[test]
    fn ties_break_on_quality_then_id() {
        // identical X direction (same source, same continuous values) => equal cosine
        let corpus = vec![
            oer("c", ExpertiseLevel::Beginner, SourceRepository::Youtube, (0.7, 0.7)),
            oer("b", ExpertiseLevel::Beginner, SourceRepository::Youtube, (0.7, 0.7)),
        ];
        let mut p = [0.0; super::super::vector::DIM];
        p[5] = 1.0; // only the youtube one-hot matters
        let p = PreferenceVector::clamped(p);
        let stats = CorpusStats::default();
        let r = recommend_at_level(&p, "sql", ExpertiseLevel::Beginner, &corpus, &stats, &HashSet::new()).unwrap();
        assert_eq!(r.oer.id, "b");
    }
}
