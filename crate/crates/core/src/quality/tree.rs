//! Binary CART classification tree with Gini impurity splits.
//!
//! Nodes live in a flat arena in pre-order; the root is node 0. A sample goes
//! left when `x[feature] <= threshold`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node<T> {
    Split {
        feature: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    /// Training samples that reached the leaf, `[negative, positive]`.
    Leaf {
        counts: [u32; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree<T> {
    pub nodes: Vec<Node<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or cannot be split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: usize,
}

impl<T: Scalar> DecisionTree<T> {
    /// Grows a tree on the rows selected by `sample_idx` (repeats allowed).
    pub fn fit<R: Rng>(
        rows: &[Vec<T>],
        labels: &[bool],
        sample_idx: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
    ) -> Self {
        let n_features = rows.first().map_or(0, Vec::len);
        let mut nodes = Vec::new();
        let mut builder = Builder { rows, labels, params, n_features, nodes: &mut nodes };
        builder.grow(sample_idx, 0, rng);
        DecisionTree { nodes }
    }

    /// Leaf reached by `x`.
    pub fn leaf_counts(&self, x: &[T]) -> [u32; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return *counts,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Positive-class share of the leaf reached by `x`.
    pub fn positive_share(&self, x: &[T]) -> T {
        let [neg, pos] = self.leaf_counts(x);
        T::lit(pos as f64) / T::lit((neg + pos).max(1) as f64)
    }

    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    /// Checks arena links and that every split uses a feature below `n_features`.
    pub fn validate(&self, n_features: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if i >= self.nodes.len() {
                return Err(format!("dangling node reference {i}"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(format!("node {i} reachable twice"));
            }
            match &self.nodes[i] {
                Node::Leaf { counts } if counts[0] + counts[1] == 0 => return Err(format!("leaf {i} has no samples")),
                Node::Leaf { .. } => {}
                Node::Split { feature, threshold, left, right } => {
                    if *feature >= n_features {
                        return Err(format!("node {i} splits on feature {feature} of {n_features}"));
                    }
                    if threshold.is_nan() {
                        return Err(format!("node {i} has NaN threshold"));
                    }
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("unreachable nodes in tree".into());
        }
        Ok(())
    }
}

struct Builder<'a, T> {
    rows: &'a [Vec<T>],
    labels: &'a [bool],
    params: &'a TreeParams,
    n_features: usize,
    nodes: &'a mut Vec<Node<T>>,
}

struct Candidate<T> {
    feature: usize,
    threshold: T,
    impurity: f64,
}

fn counts_of(labels: &[bool], idx: &[usize]) -> [u32; 2] {
    let pos = idx.iter().filter(|&&i| labels[i]).count() as u32;
    [idx.len() as u32 - pos, pos]
}

/// `n * gini` for a node with the given class counts.
fn weighted_gini(c0: u64, c1: u64) -> f64 {
    let n = c0 + c1;
    if n == 0 {
        return 0.0;
    }
    n as f64 - ((c0 * c0 + c1 * c1) as f64) / n as f64
}

impl<T: Scalar> Builder<'_, T> {
    fn grow<R: Rng>(&mut self, idx: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let id = self.nodes.len();
        let counts = counts_of(self.labels, &idx);
        self.nodes.push(Node::Leaf { counts });

        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || idx.len() < 2 * self.params.min_leaf.max(1) {
            return id;
        }
        let Some(best) = self.best_split(&idx, rng) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| self.rows[i][best.feature] <= best.threshold);
        let left = self.grow(left_idx, depth + 1, rng);
        let right = self.grow(right_idx, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: best.feature, threshold: best.threshold, left, right };
        id
    }

    /// Best split over a random feature subset. When the subset admits no valid
    /// split the remaining features are searched too, so a node is only left
    /// unsplit when no feature can separate it.
    fn best_split<R: Rng>(&self, idx: &[usize], rng: &mut R) -> Option<Candidate<T>> {
        let k = self.params.features_per_split.clamp(1, self.n_features);
        let mut chosen: Vec<usize> = sample(rng, self.n_features, k).into_vec();
        chosen.sort_unstable();
        if let Some(best) = self.search(idx, &chosen) {
            return Some(best);
        }
        let rest: Vec<usize> = (0..self.n_features).filter(|f| !chosen.contains(f)).collect();
        self.search(idx, &rest)
    }

    /// Scans features in ascending order and thresholds in ascending order,
    /// replacing the incumbent only on strictly lower impurity.
    fn search(&self, idx: &[usize], features: &[usize]) -> Option<Candidate<T>> {
        let min_leaf = self.params.min_leaf.max(1);
        let n = idx.len();
        let total = counts_of(self.labels, idx);
        let mut best: Option<Candidate<T>> = None;
        let mut column: Vec<(T, bool)> = Vec::with_capacity(n);
        for &f in features {
            column.clear();
            column.extend(idx.iter().map(|&i| (self.rows[i][f], self.labels[i])));
            column.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            let mut left = [0u64; 2];
            for split in 1..n {
                left[column[split - 1].1 as usize] += 1;
                let lo = column[split - 1].0;
                let hi = column[split].0;
                if !(lo < hi) || split < min_leaf || n - split < min_leaf {
                    continue;
                }
                let right = [total[0] as u64 - left[0], total[1] as u64 - left[1]];
                let impurity = (weighted_gini(left[0], left[1]) + weighted_gini(right[0], right[1])) / n as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mid = (lo + hi) / T::lit(2.0);
                    let threshold = if mid < hi { mid } else { lo };
                    best = Some(Candidate { feature: f, threshold, impurity });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(max_depth: Option<usize>, min_leaf: usize, k: usize) -> TreeParams {
        TreeParams { max_depth, min_leaf, features_per_split: k }
    }

    #[test]
    fn single_threshold_split() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let labels = [false, false, false, true, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = DecisionTree::fit(&rows, &labels, (0..6).collect(), &params(None, 1, 1), &mut rng);
        assert_eq!(t.nodes.len(), 3);
        match &t.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
            }
            n => panic!("expected split, got {n:?}"),
        }
        assert_eq!(t.leaf_counts(&[0.0]), [3, 0]);
        assert_eq!(t.leaf_counts(&[5.0]), [0, 3]);
        t.validate(1).unwrap();
    }

    #[test]
    fn ties_prefer_lowest_feature_then_lowest_threshold() {
        // feature 0 and 1 separate equally well; feature 0 must win.
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let labels = [false, false, true, true];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = DecisionTree::fit(&rows, &labels, (0..4).collect(), &params(None, 1, 2), &mut rng);
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, threshold, .. } if threshold == 1.5));
    }

    #[test]
    fn min_leaf_is_respected() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let labels = [true, false, false, false, false];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = DecisionTree::fit(&rows, &labels, (0..5).collect(), &params(None, 2, 1), &mut rng);
        for node in &t.nodes {
            if let Node::Leaf { counts } = node {
                assert!(counts[0] + counts[1] >= 2);
            }
        }
    }

    #[test]
    fn depth_cap() {
        let rows: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let labels: Vec<bool> = (0..32).map(|i| i % 2 == 0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = DecisionTree::fit(&rows, &labels, (0..32).collect(), &params(Some(3), 1, 1), &mut rng);
        assert!(t.depth() <= 3);
    }

    #[test]
    fn identical_points_with_mixed_labels_make_a_leaf() {
        let rows = vec![vec![1.0f64], vec![1.0], vec![1.0]];
        let labels = [true, false, true];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = DecisionTree::fit(&rows, &labels, vec![0, 1, 2], &params(None, 1, 1), &mut rng);
        assert_eq!(t.nodes, vec![Node::Leaf { counts: [1, 2] }]);
        assert!((t.positive_share(&[1.0]) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn validate_catches_bad_feature() {
        let t: DecisionTree<f64> = DecisionTree {
            nodes: vec![
                Node::Split { feature: 4, threshold: 0.0, left: 1, right: 2 },
                Node::Leaf { counts: [1, 0] },
                Node::Leaf { counts: [0, 1] },
            ],
        };
        assert!(t.validate(2).is_err());
        assert!(t.validate(5).is_ok());
    }
}
