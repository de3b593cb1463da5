//! Greedy CART fitting of ±1-leaf trees against a real-valued target — the
//! projection of a gradient representer onto the weak-learner class under the
//! empirical norm.
//!
//! With leaf values fixed to sign(mean target), minimizing squared error at a
//! node is the same as maximizing |sum of targets left| + |sum right|, so the
//! split search scores that quantity. It is invariant under positive scaling
//! of the target, which keeps proportional targets selecting identical trees.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tree::{Node, Tree};
use rayon::prelude::*;

/// Weak-learner family: depth-limited trees, exhaustive threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig { max_depth: 5, min_leaf: 1 }
    }
}

impl TreeConfig {
    pub fn new(max_depth: usize, min_leaf: usize) -> Result<Self> {
        let config = TreeConfig { max_depth, min_leaf };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::InvalidConfig("min_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Split {
    score: f64,
    feature: usize,
    threshold: f64,
}

/// Best threshold on one feature, or None if the feature is constant on the
/// node or min_leaf leaves no legal cut.
fn best_split_on_feature(
    data: &Dataset,
    indices: &[usize],
    target: &[f64],
    feature: usize,
    min_leaf: usize,
) -> Option<Split> {
    let mut order: Vec<(f64, usize)> =
        indices.iter().map(|&i| (data.row(i)[feature], i)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    let total: f64 = order.iter().map(|&(_, i)| target[i]).sum();
    let mut left = 0.0;
    let mut best: Option<Split> = None;
    for cut in 1..order.len() {
        left += target[order[cut - 1].1];
        if cut < min_leaf || order.len() - cut < min_leaf {
            continue;
        }
        let (lo, hi) = (order[cut - 1].0, order[cut].0);
        if lo == hi {
            continue; // thresholds sit between distinct values only
        }
        let score = left.abs() + (total - left).abs();
        // Ascending threshold order plus strict > breaks ties toward the
        // smaller threshold.
        if best.map_or(true, |b| score > b.score) {
            best = Some(Split { score, feature, threshold: 0.5 * (lo + hi) });
        }
    }
    best
}

/// Best split over all features: highest score, then lowest feature index,
/// then lowest threshold.
fn best_split(data: &Dataset, indices: &[usize], target: &[f64], min_leaf: usize) -> Option<Split> {
    let per_feature: Vec<Option<Split>> = (0..data.d())
        .into_par_iter()
        .map(|f| best_split_on_feature(data, indices, target, f, min_leaf))
        .collect();
    // Sequential fold in feature order keeps the result independent of the
    // thread count.
    let mut best: Option<Split> = None;
    for cand in per_feature.into_iter().flatten() {
        if best.map_or(true, |b| cand.score > b.score) {
            best = Some(cand);
        }
    }
    best
}

fn leaf_for(sum: f64) -> Node {
    Node::Leaf { value: if sum >= 0.0 { 1.0 } else { -1.0 } }
}

fn build(
    data: &Dataset,
    indices: &[usize],
    target: &[f64],
    depth_left: usize,
    min_leaf: usize,
) -> Node {
    let sum: f64 = indices.iter().map(|&i| target[i]).sum();
    if depth_left == 0 || indices.len() < 2 * min_leaf {
        return leaf_for(sum);
    }
    let split = match best_split(data, indices, target, min_leaf) {
        Some(s) if s.score > sum.abs() => s, // splitting must strictly reduce the error
        _ => return leaf_for(sum),
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
        indices.iter().partition(|&&i| data.row(i)[split.feature] <= split.threshold);
    Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(build(data, &left_idx, target, depth_left - 1, min_leaf)),
        right: Box::new(build(data, &right_idx, target, depth_left - 1, min_leaf)),
    }
}

/// Fit a tree minimizing (1/N) sum (f(X_i) - target_i)^2 over the greedy CART
/// search space, with ±1 leaves. Deterministic: ties in split score break by
/// (feature index, threshold).
pub fn fit_projection(data: &Dataset, target: &[f64], config: &TreeConfig) -> Result<Tree> {
    config.validate()?;
    if target.len() != data.n() {
        return Err(Error::LengthMismatch { left: target.len(), right: data.n() });
    }
    if let Some(i) = target.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    if data.n() < 2 * config.min_leaf {
        return Err(Error::TooFewRows { needed: 2 * config.min_leaf, got: data.n() });
    }
    let indices: Vec<usize> = (0..data.n()).collect();
    let root = build(data, &indices, target, config.max_depth, config.min_leaf);
    Ok(Tree::new(data.d(), root))
}

/// Mean squared distance (1/N) sum (tree(X_i) - target_i)^2.
pub fn projection_error(tree: &Tree, data: &Dataset, target: &[f64]) -> Result<f64> {
    if target.len() != data.n() {
        return Err(Error::LengthMismatch { left: target.len(), right: data.n() });
    }
    let mut acc = 0.0;
    for i in 0..data.n() {
        let diff = tree.predict(data.row(i))? - target[i];
        acc += diff * diff;
    }
    Ok(acc / data.n() as f64)
}
