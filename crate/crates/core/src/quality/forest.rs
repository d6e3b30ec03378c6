use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Labeled rows with named feature columns. Label `true` is the positive class
/// (`fit` for properties, `controlled` for metadata).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<T>>,
    pub labels: Vec<bool>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<T>>, labels: Vec<bool>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::validation("dataset", format!("{} rows but {} labels", rows.len(), labels.len())));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != feature_names.len()) {
            return Err(Error::validation(
                "dataset",
                format!("row {i} has {} values, expected {}", r.len(), feature_names.len()),
            ));
        }
        Ok(Dataset { feature_names, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` means `ceil(sqrt(d))`.
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    /// Share of rows held out (stratified per class) for the reported metrics.
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: Some(8),
            min_leaf: 2,
            features_per_split: None,
            bootstrap: true,
            holdout_fraction: 0.2,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(seed: u64) -> Self {
        ForestParams { seed, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMetrics {
    pub f1: f64,
    pub accuracy: f64,
    pub n_train: usize,
    /// Zero when nothing was held out; metrics are then on the training rows.
    pub n_holdout: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel<T> {
    pub feature_set: Vec<String>,
    pub trees: Vec<DecisionTree<T>>,
    pub metrics: TrainingMetrics,
    pub seed: u64,
    pub params: ForestParams,
}

/// Anything that can supply feature values by name.
pub trait FeatureSource<T> {
    fn feature_value(&self, name: &str) -> Option<T>;
}

impl<T: Copy> FeatureSource<T> for HashMap<String, T> {
    fn feature_value(&self, name: &str) -> Option<T> {
        self.get(name).copied()
    }
}

impl<T: Copy> FeatureSource<T> for [(&str, T)] {
    fn feature_value(&self, name: &str) -> Option<T> {
        self.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }
}

/// Binary F1 and accuracy. F1 is 1 when there are no positives to find and
/// none were predicted.
pub fn binary_metrics(truth: &[bool], predicted: &[bool]) -> (f64, f64) {
    let (mut tp, mut fp, mut fnn, mut correct) = (0usize, 0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(predicted) {
        match (t, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fnn += 1,
            (false, false) => {}
        }
        correct += (t == p) as usize;
    }
    let denom = 2 * tp + fp + fnn;
    let f1 = if denom == 0 { 1.0 } else { 2.0 * tp as f64 / denom as f64 };
    let acc = if truth.is_empty() { 0.0 } else { correct as f64 / truth.len() as f64 };
    (f1, acc)
}

/// Stratified split: each class contributes `round(n_class * fraction)` rows to
/// the holdout, leaving at least one row of each class for training.
fn stratified_split<R: Rng>(labels: &[bool], fraction: f64, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut holdout = Vec::new();
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(rng);
        let k = ((idx.len() as f64 * fraction).round() as usize).min(idx.len().saturating_sub(1));
        holdout.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    holdout.sort_unstable();
    (train, holdout)
}

/// Per-tree RNG. Tree `i` is seeded with `seed + i`, so parallel and
/// sequential training build identical forests.
fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(index as u64))
}

pub fn train_forest<T: Scalar>(data: &Dataset<T>, params: &ForestParams) -> Result<ForestModel<T>> {
    if data.is_empty() {
        return Err(Error::validation("dataset", "no rows"));
    }
    if data.feature_names.is_empty() {
        return Err(Error::validation("dataset", "no feature columns"));
    }
    let positives = data.labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::Training("dataset contains a single class".into()));
    }
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be positive".into()));
    }
    if !(0.0..1.0).contains(&params.holdout_fraction) {
        return Err(Error::Config(format!("holdout_fraction {} outside [0,1)", params.holdout_fraction)));
    }

    let d = data.feature_names.len();
    let features_per_split = params.features_per_split.unwrap_or_else(|| (d as f64).sqrt().ceil() as usize).clamp(1, d);
    let tree_params = TreeParams { max_depth: params.max_depth, min_leaf: params.min_leaf.max(1), features_per_split };

    let mut split_rng = ChaCha8Rng::seed_from_u64(params.seed);
    split_rng.set_stream(1);
    let (train, holdout) = stratified_split(&data.labels, params.holdout_fraction, &mut split_rng);

    let trees: Vec<DecisionTree<T>> = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = tree_rng(params.seed, i);
            let sample_idx = if params.bootstrap {
                (0..train.len()).map(|_| train[rng.random_range(0..train.len())]).collect()
            } else {
                train.clone()
            };
            DecisionTree::fit(&data.rows, &data.labels, sample_idx, &tree_params, &mut rng)
        })
        .collect();

    let mut model = ForestModel {
        feature_set: data.feature_names.clone(),
        trees,
        metrics: TrainingMetrics::default(),
        seed: params.seed,
        params: *params,
    };
    let eval = if holdout.is_empty() { &train } else { &holdout };
    let truth: Vec<bool> = eval.iter().map(|&i| data.labels[i]).collect();
    let predicted: Vec<bool> = eval.iter().map(|&i| model.predict_row(&data.rows[i]) >= T::lit(0.5)).collect();
    let (f1, accuracy) = binary_metrics(&truth, &predicted);
    model.metrics = TrainingMetrics { f1, accuracy, n_train: train.len(), n_holdout: holdout.len() };
    Ok(model)
}

impl<T: Scalar> ForestModel<T> {
    /// Mean over trees of the positive share in the leaf each tree reaches.
    /// `row` must be in `feature_set` order.
    pub fn predict_row(&self, row: &[T]) -> T {
        let sum: T = self.trees.iter().map(|t| t.positive_share(row)).sum();
        (sum / T::lit(self.trees.len().max(1) as f64)).clamp_unit()
    }

    /// Gathers the model's features from `input` in order.
    pub fn gather<S: FeatureSource<T> + ?Sized>(&self, input: &S) -> Result<Vec<T>> {
        self.feature_set
            .iter()
            .map(|name| input.feature_value(name).ok_or_else(|| Error::MissingFeature(name.clone())))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidModel("forest has no trees".into()));
        }
        for (i, t) in self.trees.iter().enumerate() {
            t.validate(self.feature_set.len()).map_err(|e| Error::InvalidModel(format!("tree {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }
}

/// Probability of the positive class for `input`.
pub fn predict_proba<T: Scalar, S: FeatureSource<T> + ?Sized>(model: &ForestModel<T>, input: &S) -> Result<T> {
    if model.trees.is_empty() {
        return Err(Error::InvalidModel("forest has no trees".into()));
    }
    let row = model.gather(input)?;
    Ok(model.predict_row(&row))
}
