use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MediaKind, OerRecord, SourceRepository};
use crate::normalize::{native_rate_to_unit, normalize_length};
use crate::scalar::{dot, Scalar};

/// Components of X and P: five continuous signals followed by the source one-hot.
pub const DIM: usize = 5 + SourceRepository::COUNT;

pub const LENGTH: usize = 0;
pub const RATE: usize = 1;
pub const SKILL_SIMILARITY: usize = 2;
pub const QUALITY_META: usize = 3;
pub const QUALITY_PROP: usize = 4;
pub const SOURCE_OFFSET: usize = 5;

pub const COMPONENT_NAMES: [&str; DIM] = [
    "length",
    "rate",
    "skill_similarity",
    "quality_meta",
    "quality_prop",
    "source_youtube",
    "source_mit_open_course_ware",
    "source_skills_commons",
    "source_oer_commons",
    "source_wisc_online",
    "source_khan_academy",
    "source_wikipedia",
];

/// Value used for a missing length, rate or similarity.
pub const NEUTRAL: f64 = 0.5;

/// Which components of a feature vector were imputed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Imputed {
    #[serde(default)]
    pub length: bool,
    #[serde(default)]
    pub rate: bool,
    #[serde(default)]
    pub skill_similarity: bool,
}

/// Per-OER vector X.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureVector<T> {
    pub values: [T; DIM],
    #[serde(default)]
    pub imputed: Imputed,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn zeros() -> Self {
        FeatureVector { values: [T::zero(); DIM], imputed: Imputed::default() }
    }

    pub fn from_parts(continuous: [T; 5], source: SourceRepository) -> Self {
        let mut values = [T::zero(); DIM];
        values[..5].copy_from_slice(&continuous);
        values[SOURCE_OFFSET + source.index()] = T::one();
        FeatureVector { values, imputed: Imputed::default() }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn norm_squared(&self) -> T {
        dot(&self.values, &self.values)
    }

    pub fn cast<U: Scalar>(&self) -> FeatureVector<U> {
        FeatureVector { values: self.values.map(|v| U::lit(v.to_f64_lossy())), imputed: self.imputed }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.values[..SOURCE_OFFSET].iter().enumerate() {
            if !(*v >= T::zero() && *v <= T::one()) {
                return Err(Error::validation(COMPONENT_NAMES[i], format!("{v} outside [0,1]")));
            }
        }
        let ones = self.values[SOURCE_OFFSET..].iter().filter(|&&v| v == T::one()).count();
        let zeros = self.values[SOURCE_OFFSET..].iter().filter(|&&v| v == T::zero()).count();
        if ones != 1 || ones + zeros != SourceRepository::COUNT {
            return Err(Error::validation("source", "source components are not one-hot"));
        }
        Ok(())
    }
}

/// Per-learner weights P, each component in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "[T; DIM]", into = "[T; DIM]")]
pub struct PreferenceVector<T>([T; DIM]);

impl<T: Scalar> PreferenceVector<T> {
    /// Projects each component onto [0,1].
    pub fn clamped(values: [T; DIM]) -> Self {
        PreferenceVector(values.map(Scalar::clamp_unit))
    }

    pub fn uniform(v: T) -> Self {
        Self::clamped([v; DIM])
    }

    pub fn neutral() -> Self {
        Self::uniform(T::lit(NEUTRAL))
    }

    pub fn values(&self) -> &[T; DIM] {
        &self.0
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn dot(&self, x: &FeatureVector<T>) -> T {
        dot(&self.0, &x.values)
    }

    pub fn cast<U: Scalar>(&self) -> PreferenceVector<U> {
        PreferenceVector::clamped(self.0.map(|v| U::lit(v.to_f64_lossy())))
    }
}

impl<T: Scalar> TryFrom<[T; DIM]> for PreferenceVector<T> {
    type Error = String;

    fn try_from(values: [T; DIM]) -> std::result::Result<Self, String> {
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(format!("preference component {v} outside [0,1]"));
        }
        Ok(PreferenceVector(values))
    }
}

impl<T> From<PreferenceVector<T>> for [T; DIM] {
    fn from(p: PreferenceVector<T>) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthRange {
    pub min: f64,
    pub max: f64,
}

/// Corpus-level statistics feature vectors are normalized against.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub lengths: BTreeMap<MediaKind, LengthRange>,
}

impl CorpusStats {
    pub fn compute<'a>(records: impl IntoIterator<Item = &'a OerRecord>) -> Self {
        let mut lengths: BTreeMap<MediaKind, LengthRange> = BTreeMap::new();
        for r in records {
            let Some(len) = r.length.filter(|l| l.is_finite() && *l >= 0.0) else { continue };
            lengths
                .entry(r.source.media_kind())
                .and_modify(|range| {
                    range.min = range.min.min(len);
                    range.max = range.max.max(len);
                })
                .or_insert(LengthRange { min: len, max: len });
        }
        CorpusStats { lengths }
    }
}

/// Assembles X for a record that has passed the quality filter.
pub fn build_feature_vector<T: Scalar>(oer: &OerRecord, stats: &CorpusStats) -> Result<FeatureVector<T>> {
    let (Some(meta), Some(prop)) = (oer.quality_meta, oer.quality_prop) else {
        return Err(Error::validation("quality", format!("record `{}` has not been quality scored", oer.id)));
    };
    let mut imputed = Imputed::default();
    let neutral = T::lit(NEUTRAL);

    let length = match oer.length {
        Some(len) => {
            let kind = oer.source.media_kind();
            let range = stats
                .lengths
                .get(&kind)
                .ok_or_else(|| Error::validation("corpus_stats", format!("no length range for {kind:?} media")))?;
            normalize_length(T::lit(len), T::lit(range.min), T::lit(range.max))?
        }
        None => {
            imputed.length = true;
            neutral
        }
    };
    let rate = match &oer.native_rate {
        Some(r) => native_rate_to_unit(r)?,
        None => {
            imputed.rate = true;
            neutral
        }
    };
    let similarity = match oer.skill_similarity {
        Some(s) => ((T::lit(s) + T::one()) / T::lit(2.0)).clamp_unit(),
        None => {
            imputed.skill_similarity = true;
            neutral
        }
    };
    let mut x = FeatureVector::from_parts(
        [length, rate, similarity, T::lit(meta).clamp_unit(), T::lit(prop).clamp_unit()],
        oer.source,
    );
    x.imputed = imputed;
    Ok(x)
}
