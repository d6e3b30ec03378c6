//! Metadata presence indicators and the weighted completeness score.

use serde::{Deserialize, Serialize};

use super::forest::{Dataset, FeatureSource};
use crate::error::{Error, Result};
use crate::model::OerRecord;
use crate::scalar::Scalar;

pub const METADATA_FIELDS: [&str; 8] =
    ["title", "description", "level", "duration", "subject", "language", "url", "provider"];

/// Column name of the derived completeness score in metadata feature rows.
pub const COMPLETENESS: &str = "completeness";

/// Feature names of the metadata model: the eight presence flags, then completeness.
pub fn metadata_feature_names() -> Vec<String> {
    METADATA_FIELDS.iter().copied().chain([COMPLETENESS]).map(String::from).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRecord {
    /// Presence flags in [`METADATA_FIELDS`] order.
    pub present: [bool; 8],
}

fn non_empty(s: &str) -> bool {
    !s.trim().is_empty()
}

impl MetadataRecord {
    pub fn from_record(oer: &OerRecord) -> Self {
        MetadataRecord {
            present: [
                non_empty(&oer.title),
                oer.description.as_deref().is_some_and(non_empty),
                true,
                oer.length.is_some(),
                non_empty(&oer.target_skill),
                oer.language.as_deref().is_some_and(non_empty),
                non_empty(&oer.url),
                true,
            ],
        }
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }
}

/// Per-field weights; must lie in [0,1] and sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletenessWeights(pub [f64; 8]);

impl Default for CompletenessWeights {
    fn default() -> Self {
        CompletenessWeights([0.125; 8])
    }
}

impl CompletenessWeights {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.0.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::Config(format!("completeness weight {w} outside [0,1]")));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("completeness weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

pub fn metadata_completeness_score<T: Scalar>(md: &MetadataRecord, weights: &CompletenessWeights) -> Result<T> {
    weights.validate()?;
    let s: f64 = md.present.iter().zip(weights.0).filter(|(p, _)| **p).map(|(_, w)| w).sum();
    Ok(T::lit(s).clamp_unit())
}

/// Metadata model input: flags as 0/1 plus the completeness score.
#[derive(Debug, Clone, PartialEq)]
pub struct MetadataFeatures<T> {
    pub record: MetadataRecord,
    pub completeness: T,
}

impl<T: Scalar> MetadataFeatures<T> {
    pub fn new(record: MetadataRecord, weights: &CompletenessWeights) -> Result<Self> {
        Ok(MetadataFeatures { record, completeness: metadata_completeness_score(&record, weights)? })
    }

    pub fn row(&self) -> Vec<T> {
        self.record.present.iter().map(|&p| if p { T::one() } else { T::zero() }).chain([self.completeness]).collect()
    }
}

impl<T: Scalar> FeatureSource<T> for MetadataFeatures<T> {
    fn feature_value(&self, name: &str) -> Option<T> {
        if name == COMPLETENESS {
            return Some(self.completeness);
        }
        let i = METADATA_FIELDS.iter().position(|&f| f == name)?;
        Some(if self.record.present[i] { T::one() } else { T::zero() })
    }
}

/// Labeled presence rows from the metadata training CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetadataTable {
    pub rows: Vec<MetadataRecord>,
    pub labels: Vec<bool>,
}

impl MetadataTable {
    pub fn push(&mut self, row: MetadataRecord, label: bool) {
        self.rows.push(row);
        self.labels.push(label);
    }

    pub fn to_dataset<T: Scalar>(&self, weights: &CompletenessWeights) -> Result<Dataset<T>> {
        let rows = self
            .rows
            .iter()
            .map(|r| MetadataFeatures::<T>::new(*r, weights).map(|f| f.row()))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(metadata_feature_names(), rows, self.labels.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExpertiseLevel, SourceRepository};

    #[test]
    fn completeness_examples() {
        let w = CompletenessWeights::default();
        let all = MetadataRecord { present: [true; 8] };
        assert_eq!(metadata_completeness_score::<f64>(&all, &w).unwrap(), 1.0);
        let none = MetadataRecord { present: [false; 8] };
        assert_eq!(metadata_completeness_score::<f64>(&none, &w).unwrap(), 0.0);
        let half = MetadataRecord { present: [true, false, true, false, true, false, true, false] };
        assert_eq!(metadata_completeness_score::<f64>(&half, &w).unwrap(), 0.5);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let md = MetadataRecord::default();
        let bad = CompletenessWeights([0.2; 8]);
        assert!(matches!(metadata_completeness_score::<f64>(&md, &bad), Err(Error::Config(_))));
        let ok = CompletenessWeights([0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05]);
        assert!(ok.validate().is_ok());
        let negative = CompletenessWeights([1.5, -0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(negative.validate().is_err());
    }

    #[test]
    fn indicators_from_record() {
        let mut r =
            OerRecord::new("a", SourceRepository::Wikipedia, "Intro", "sql", ExpertiseLevel::Beginner, "http://x");
        r.description = Some("  ".into());
        let md = MetadataRecord::from_record(&r);
        assert_eq!(md.present, [true, false, true, false, true, false, true, true]);
        let f = MetadataFeatures::<f64>::new(md, &CompletenessWeights::default()).unwrap();
        assert_eq!(f.feature_value("completeness"), Some(0.625));
        assert_eq!(f.feature_value("description"), Some(0.0));
        assert_eq!(f.row().len(), 9);
    }
}
