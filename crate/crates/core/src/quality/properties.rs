use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::forest::{Dataset, FeatureSource};
use crate::error::{Error, Result};
use crate::model::OerRecord;
use crate::normalize::native_rate_to_unit;
use crate::scalar::Scalar;

/// Property feature names in canonical column order.
pub const PROPERTY_FEATURES: [&str; 5] = ["length", "rate", "skill_similarity", "view_count", "ranking_position_score"];

/// Properties that are realistically missing and get alternate models.
pub const OPTIONAL_PROPERTY_FEATURES: [&str; 3] = ["rate", "view_count", "skill_similarity"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyFeatures<T> {
    /// Seconds.
    pub length: Option<T>,
    pub rate: Option<T>,
    pub skill_similarity: Option<T>,
    pub view_count: Option<T>,
    pub ranking_position_score: Option<T>,
}

impl<T: Scalar> PropertyFeatures<T> {
    pub fn from_record(oer: &OerRecord) -> Result<Self> {
        Ok(PropertyFeatures {
            length: oer.length.map(T::lit),
            rate: oer.native_rate.as_ref().map(native_rate_to_unit).transpose()?,
            skill_similarity: oer.skill_similarity.map(T::lit),
            view_count: oer.view_count.map(|v| T::lit(v as f64)),
            ranking_position_score: oer.ranking_position_score.map(T::lit),
        })
    }

    fn slots(&self) -> [Option<T>; 5] {
        [self.length, self.rate, self.skill_similarity, self.view_count, self.ranking_position_score]
    }

    /// Names of the features that are present.
    pub fn available(&self) -> BTreeSet<String> {
        PROPERTY_FEATURES.iter().zip(self.slots()).filter(|(_, v)| v.is_some()).map(|(n, _)| n.to_string()).collect()
    }
}

impl<T: Scalar> FeatureSource<T> for PropertyFeatures<T> {
    fn feature_value(&self, name: &str) -> Option<T> {
        let i = PROPERTY_FEATURES.iter().position(|&n| n == name)?;
        self.slots()[i]
    }
}

/// Property rows with missing cells, as read from the training CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PropertyTable<T> {
    pub rows: Vec<PropertyFeatures<T>>,
    pub labels: Vec<bool>,
}

impl<T: Scalar> PropertyTable<T> {
    pub fn push(&mut self, row: PropertyFeatures<T>, label: bool) {
        self.rows.push(row);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Complete-case dataset over `features`: rows missing any of them are dropped.
    pub fn project(&self, features: &[String]) -> Result<Dataset<T>> {
        for f in features {
            if !PROPERTY_FEATURES.contains(&f.as_str()) {
                return Err(Error::validation("feature", format!("unknown property `{f}`")));
            }
        }
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (r, &l) in self.rows.iter().zip(&self.labels) {
            let values: Option<Vec<T>> = features.iter().map(|f| r.feature_value(f)).collect();
            if let Some(values) = values {
                rows.push(values);
                labels.push(l);
            }
        }
        Dataset::new(features.to_vec(), rows, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ExpertiseLevel, NativeRate, SourceRepository};

    #[test]
    fn features_from_record() {
        let mut r = OerRecord::new("a", SourceRepository::Youtube, "t", "s", ExpertiseLevel::Beginner, "u");
        r.length = Some(120.0);
        r.native_rate = Some(NativeRate::LikeDislike { likes: 3, dislikes: 1 });
        r.ranking_position_score = Some(0.5);
        let f = PropertyFeatures::<f64>::from_record(&r).unwrap();
        assert_eq!(f.rate, Some(0.75));
        assert_eq!(f.view_count, None);
        let avail: Vec<_> = f.available().into_iter().collect();
        assert_eq!(avail, ["length", "ranking_position_score", "rate"]);
        assert_eq!(f.feature_value("length"), Some(120.0));
        assert_eq!(f.feature_value("bogus"), None);
    }

    #[test]
    fn projection_drops_incomplete_rows() {
        let mut t = PropertyTable::default();
        t.push(PropertyFeatures { length: Some(1.0), rate: Some(0.5), ..Default::default() }, true);
        t.push(PropertyFeatures { length: Some(2.0), ..Default::default() }, false);
        let d = t.project(&["length".into(), "rate".into()]).unwrap();
        assert_eq!(d.rows, vec![vec![1.0, 0.5]]);
        let d = t.project(&["length".into()]).unwrap();
        assert_eq!(d.len(), 2);
        assert!(t.project(&["colour".into()]).is_err());
    }
}
