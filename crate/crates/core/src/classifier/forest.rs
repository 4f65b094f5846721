//! Gini decision trees and bagged forests over fixed-width feature rows.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::FEATURE_COUNT;

pub type Row = [f64; FEATURE_COUNT];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per split.
    pub max_features: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 8,
            min_leaf: 2,
            max_features: 3,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<(), String> {
        for (name, value) in [
            ("tree count", self.n_trees),
            ("maximum depth", self.max_depth),
            ("minimum leaf size", self.min_leaf),
            ("features per split", self.max_features),
        ] {
            if value == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Flat tree node. `feature < 0` marks a leaf.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: i32,
    pub threshold: f64,
    pub left: u32,
    pub right: u32,
    pub leaf_fraction: f64,
}

impl TreeNode {
    fn leaf(fraction: f64) -> Self {
        Self {
            feature: -1,
            threshold: 0.0,
            left: 0,
            right: 0,
            leaf_fraction: fraction,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.feature < 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Positive-class fraction of the leaf `row` falls into.
    pub fn leaf_fraction(&self, row: &Row) -> f64 {
        let mut i = 0usize;
        loop {
            let node = &self.nodes[i];
            if node.is_leaf() {
                return node.leaf_fraction;
            }
            i = if row[node.feature as usize] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }

    /// Structural sanity: children in range, root exists.
    pub fn is_well_formed(&self) -> bool {
        !self.nodes.is_empty()
            && self.nodes.iter().all(|n| {
                n.is_leaf()
                    || ((n.feature as usize) < FEATURE_COUNT
                        && (n.left as usize) < self.nodes.len()
                        && (n.right as usize) < self.nodes.len())
            })
            && self.nodes.iter().all(|n| (0.0..=1.0).contains(&n.leaf_fraction))
    }
}

/// Fraction of trees voting positive (leaf fraction above one half).
pub fn vote_fraction(trees: &[DecisionTree], row: &Row) -> f64 {
    if trees.is_empty() {
        return 0.0;
    }
    let votes = trees.iter().filter(|t| t.leaf_fraction(row) > 0.5).count();
    votes as f64 / trees.len() as f64
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Per-tree seed derived from (seed, stream, tree) only, so any schedule gives the same forest.
pub fn tree_seed(seed: u64, stream: u64, tree: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ tree)
}

/// Train `hyper.n_trees` trees on bootstrap samples of (`rows`, `labels`).
pub fn train_forest(
    rows: &[Row],
    labels: &[bool],
    hyper: &Hyperparameters,
    seed: u64,
    stream: u64,
) -> Vec<DecisionTree> {
    assert_eq!(rows.len(), labels.len());
    (0..hyper.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed(seed, stream, t as u64));
            let n = rows.len();
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            grow_tree(rows, labels, sample, hyper, &mut rng)
        })
        .collect()
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

pub fn grow_tree(
    rows: &[Row],
    labels: &[bool],
    sample: Vec<usize>,
    hyper: &Hyperparameters,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    let mut nodes: Vec<TreeNode> = Vec::new();
    // (sample indices, depth, node slot)
    let mut stack: Vec<(Vec<usize>, usize, usize)> = Vec::new();
    nodes.push(TreeNode::leaf(0.0));
    stack.push((sample, 0, 0));
    let mut features: Vec<usize> = (0..FEATURE_COUNT).collect();

    while let Some((idx, depth, slot)) = stack.pop() {
        let total = idx.len();
        let pos = idx.iter().filter(|&&i| labels[i]).count();
        let fraction = if total == 0 { 0.0 } else { pos as f64 / total as f64 };
        nodes[slot] = TreeNode::leaf(fraction);
        if depth >= hyper.max_depth || total < 2 * hyper.min_leaf.max(1) || pos == 0 || pos == total {
            continue;
        }
        features.shuffle(rng);
        let parent = gini(pos, total);
        let mut best: Option<Split> = None;
        for (examined, &f) in features.iter().enumerate() {
            if examined >= hyper.max_features.max(1) && best.is_some() {
                break;
            }
            if let Some(s) = best_split_on(rows, labels, &idx, f, hyper.min_leaf.max(1)) {
                if s.impurity < parent - 1e-12 && best.as_ref().is_none_or(|b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { continue };
        let (left, right): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| rows[i][split.feature] <= split.threshold);
        let l = nodes.len();
        nodes.push(TreeNode::leaf(0.0));
        nodes.push(TreeNode::leaf(0.0));
        nodes[slot] = TreeNode {
            feature: split.feature as i32,
            threshold: split.threshold,
            left: l as u32,
            right: (l + 1) as u32,
            leaf_fraction: fraction,
        };
        stack.push((right, depth + 1, l + 1));
        stack.push((left, depth + 1, l));
    }
    DecisionTree { nodes }
}

fn best_split_on(rows: &[Row], labels: &[bool], idx: &[usize], feature: usize, min_leaf: usize) -> Option<Split> {
    let mut sorted: Vec<(f64, bool)> = idx.iter().map(|&i| (rows[i][feature], labels[i])).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let total = sorted.len();
    let total_pos = sorted.iter().filter(|s| s.1).count();
    let mut left_pos = 0usize;
    let mut best: Option<Split> = None;
    for i in 0..total - 1 {
        if sorted[i].1 {
            left_pos += 1;
        }
        let left_n = i + 1;
        let right_n = total - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            continue;
        }
        let (a, b) = (sorted[i].0, sorted[i + 1].0);
        if a == b {
            continue;
        }
        let impurity = (left_n as f64 * gini(left_pos, left_n) + right_n as f64 * gini(total_pos - left_pos, right_n))
            / total as f64;
        if best.as_ref().is_none_or(|s| impurity < s.impurity) {
            let mid = a + (b - a) / 2.0;
            let threshold = if mid < b { mid } else { a };
            best = Some(Split {
                feature,
                threshold,
                impurity,
            });
        }
    }
    best
}
