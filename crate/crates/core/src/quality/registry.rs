use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestModel, ForestParams};
use super::properties::{PropertyTable, OPTIONAL_PROPERTY_FEATURES, PROPERTY_FEATURES};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Alternate models over feature subsets, used when an OER lacks some properties.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRegistry<T> {
    pub full_feature_set: Vec<String>,
    pub models: Vec<ForestModel<T>>,
}

/// The full property set plus every subset that drops one or two of the
/// optional properties, in a fixed order.
pub fn lattice_subsets() -> Vec<Vec<String>> {
    let full: Vec<String> = PROPERTY_FEATURES.iter().map(|s| s.to_string()).collect();
    let opt = OPTIONAL_PROPERTY_FEATURES;
    let mut drops: Vec<Vec<&str>> = vec![vec![]];
    drops.extend(opt.iter().map(|&a| vec![a]));
    for i in 0..opt.len() {
        for j in i + 1..opt.len() {
            drops.push(vec![opt[i], opt[j]]);
        }
    }
    drops.into_iter().map(|d| full.iter().filter(|f| !d.contains(&f.as_str())).cloned().collect()).collect()
}

impl<T: Scalar> ModelRegistry<T> {
    pub fn new(full_feature_set: Vec<String>, models: Vec<ForestModel<T>>) -> Result<Self> {
        let reg = ModelRegistry { full_feature_set, models };
        reg.validate()?;
        Ok(reg)
    }

    pub fn validate(&self) -> Result<()> {
        let full: BTreeSet<&str> = self.full_feature_set.iter().map(String::as_str).collect();
        let mut seen = BTreeSet::new();
        let mut has_full = false;
        for m in &self.models {
            m.validate()?;
            let set: BTreeSet<&str> = m.feature_set.iter().map(String::as_str).collect();
            if !set.is_subset(&full) {
                return Err(Error::InvalidModel(format!(
                    "model features {:?} outside the registry feature set",
                    m.feature_set
                )));
            }
            has_full |= set == full;
            if !seen.insert(set) {
                return Err(Error::InvalidModel(format!("duplicate feature subset {:?}", m.feature_set)));
            }
        }
        if !has_full {
            return Err(Error::InvalidModel("registry lacks the full-feature model".into()));
        }
        Ok(())
    }

    pub fn full_model(&self) -> Option<&ForestModel<T>> {
        let full: BTreeSet<&String> = self.full_feature_set.iter().collect();
        self.models.iter().find(|m| m.feature_set.iter().collect::<BTreeSet<_>>() == full)
    }

    pub fn select(&self, available: &BTreeSet<String>) -> Result<&ForestModel<T>> {
        select_alternate_model(self, available)
    }
}

/// Orders models best-first: higher F1, then more features, then
/// lexicographically smaller sorted feature names.
fn preference_order<T>(a: &ForestModel<T>, b: &ForestModel<T>) -> Ordering {
    b.metrics.f1.total_cmp(&a.metrics.f1).then_with(|| b.feature_set.len().cmp(&a.feature_set.len())).then_with(|| {
        let mut x: Vec<&String> = a.feature_set.iter().collect();
        let mut y: Vec<&String> = b.feature_set.iter().collect();
        x.sort();
        y.sort();
        x.cmp(&y)
    })
}

/// Best compatible model: its features must all be available.
pub fn select_alternate_model<'a, T>(
    registry: &'a ModelRegistry<T>,
    available: &BTreeSet<String>,
) -> Result<&'a ForestModel<T>> {
    if registry.models.is_empty() {
        return Err(Error::InvalidModel("empty model registry".into()));
    }
    registry
        .models
        .iter()
        .filter(|m| m.feature_set.iter().all(|f| available.contains(f)))
        .min_by(|a, b| preference_order(a, b))
        .ok_or_else(|| Error::NoCompatibleModel(available.iter().cloned().collect::<Vec<_>>().join(",")))
}

/// Trains one forest per lattice subset on the complete cases for that subset.
pub fn train_property_registry<T: Scalar>(table: &PropertyTable<T>, params: &ForestParams) -> Result<ModelRegistry<T>> {
    let mut models = Vec::new();
    for subset in lattice_subsets() {
        let data = table.project(&subset)?;
        let model = train_forest(&data, params).map_err(|e| match e {
            Error::Training(m) | Error::Validation { message: m, .. } => {
                Error::Training(format!("subset {subset:?}: {m}"))
            }
            other => other,
        })?;
        models.push(model);
    }
    ModelRegistry::new(PROPERTY_FEATURES.iter().map(|s| s.to_string()).collect(), models)
}

#[cfg(test)]
mod tests {
    use super::super::forest::TrainingMetrics;
    use super::super::tree::{DecisionTree, Node};
    use super::*;

    fn model(features: &[&str], f1: f64) -> ForestModel<f64> {
        ForestModel {
            feature_set: features.iter().map(|s| s.to_string()).collect(),
            trees: vec![DecisionTree { nodes: vec![Node::Leaf { counts: [1, 1] }] }],
            metrics: TrainingMetrics { f1, ..Default::default() },
            seed: 0,
            params: ForestParams::default(),
        }
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lattice_has_seven_distinct_subsets() {
        let l = lattice_subsets();
        assert_eq!(l.len(), 7);
        assert_eq!(l[0].len(), 5);
        let distinct: BTreeSet<_> = l.iter().collect();
        assert_eq!(distinct.len(), 7);
        for s in &l {
            assert!(s.contains(&"length".to_string()));
            assert!(s.contains(&"ranking_position_score".to_string()));
        }
    }

    #[test]
    fn selection_rules() {
        let reg = ModelRegistry::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![model(&["a", "b", "c"], 0.9), model(&["a", "b"], 0.8), model(&["a", "c"], 0.8), model(&["a"], 0.85)],
        )
        .unwrap();
        assert_eq!(reg.select(&set(&["a", "b", "c"])).unwrap().feature_set, ["a", "b", "c"]);
        // a-only has the highest F1 among the compatible ones
        assert_eq!(reg.select(&set(&["a", "b"])).unwrap().feature_set, ["a"]);
        assert!(matches!(reg.select(&set(&[])), Err(Error::NoCompatibleModel(_))));
        assert!(reg.select(&set(&["b", "c"])).is_err());
    }

    #[test]
    fn ties_prefer_larger_then_lexicographic() {
        let reg = ModelRegistry::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![model(&["a", "b", "c"], 0.5), model(&["c", "a"], 0.8), model(&["a", "b"], 0.8), model(&["b"], 0.8)],
        )
        .unwrap();
        assert_eq!(reg.select(&set(&["a", "b", "c"])).unwrap().feature_set, ["a", "b"]);
        assert_eq!(reg.select(&set(&["b", "c"])).unwrap().feature_set, ["b"]);
    }

    #[test]
    fn registry_invariants() {
        let full = vec!["a".to_string(), "b".to_string()];
        assert!(ModelRegistry::new(full.clone(), vec![model(&["a"], 0.5)]).is_err());
        assert!(ModelRegistry::new(full.clone(), vec![model(&["a", "b"], 0.5), model(&["b", "a"], 0.4)]).is_err());
        assert!(ModelRegistry::new(full, vec![model(&["a", "b"], 0.5), model(&["z"], 0.4)]).is_err());
    }
}
