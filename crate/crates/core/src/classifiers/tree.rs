//! CART-style decision tree with Gini impurity and axis-aligned splits.
//!
//! A row goes left when `x[feature] <= threshold`. Thresholds are midpoints
//! between consecutive distinct values. Among equal-gain candidates the lowest
//! feature index wins, then the lowest threshold.

use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::class::{break_ties, SoundClass};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 10;
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(SoundClass),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// `nodes[0]` is the root.
    pub nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn gini(counts: &[usize; 4]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn counts_of(labels: impl Iterator<Item = SoundClass>) -> [usize; 4] {
    let mut c = [0; 4];
    for l in labels {
        c[l.index()] += 1;
    }
    c
}

fn majority(counts: &[usize; 4]) -> SoundClass {
    break_ties(SoundClass::ALL.into_iter().map(|c| (c, counts[c.index()], 0.0))).unwrap_or(SoundClass::NV)
}

/// Best impurity-decreasing split of `rows`, if any split decreases impurity.
pub fn best_split(data: &LabeledDataset, rows: &[usize]) -> Option<SplitChoice> {
    let parent = counts_of(rows.iter().map(|&i| data.labels[i]));
    let n = rows.len() as f64;
    let parent_gini = gini(&parent);
    let mut best: Option<SplitChoice> = None;
    let mut sorted = rows.to_vec();
    for feature in 0..data.dim() {
        sorted.sort_by(|&a, &b| data.vectors[a][feature].total_cmp(&data.vectors[b][feature]));
        let mut left = [0usize; 4];
        for w in 0..sorted.len().saturating_sub(1) {
            left[data.labels[sorted[w]].index()] += 1;
            let (lo, hi) = (data.vectors[sorted[w]][feature], data.vectors[sorted[w + 1]][feature]);
            if lo == hi {
                continue;
            }
            let right: [usize; 4] = std::array::from_fn(|c| parent[c] - left[c]);
            let nl = (w + 1) as f64;
            let gain = parent_gini - (nl / n) * gini(&left) - ((n - nl) / n) * gini(&right);
            if gain > MIN_GAIN && best.is_none_or(|b| gain > b.gain + MIN_GAIN) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(SplitChoice { feature, threshold, gain });
            }
        }
    }
    best
}

pub fn train_dt(data: &LabeledDataset, max_depth: usize) -> Result<DecisionTree> {
    if data.is_empty() {
        return Err(Error::InsufficientData("decision tree needs training data".into()));
    }
    data.check_finite()?;
    let mut tree = DecisionTree { nodes: Vec::new() };
    let rows: Vec<usize> = (0..data.len()).collect();
    grow(&mut tree, data, rows, 0, max_depth);
    Ok(tree)
}

fn grow(tree: &mut DecisionTree, data: &LabeledDataset, rows: Vec<usize>, depth: usize, max_depth: usize) -> usize {
    let id = tree.nodes.len();
    let counts = counts_of(rows.iter().map(|&i| data.labels[i]));
    tree.nodes.push(Node::Leaf(majority(&counts)));
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= max_depth {
        return id;
    }
    let Some(split) = best_split(data, &rows) else {
        return id;
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| data.vectors[i][split.feature] <= split.threshold);
    let left = grow(tree, data, l, depth + 1, max_depth);
    let right = grow(tree, data, r, depth + 1, max_depth);
    tree.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
    id
}

impl DecisionTree {
    pub fn predict(&self, vector: &[f64]) -> SoundClass {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(c) => return c,
                Node::Split { feature, threshold, left, right } => {
                    at = if vector[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
