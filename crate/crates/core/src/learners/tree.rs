//! Binary decision trees shared by the tree families.
//!
//! Splits send `x[feature] <= threshold` left. Thresholds are always one of
//! the training values of the split feature, so a fitted tree depends only
//! on the order of each column.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::DataView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    /// Impurity of a node with `pos` positives out of `n`.
    fn impurity(self, pos: usize, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let p = pos as f64 / n as f64;
        let q = 1.0 - p;
        match self {
            Criterion::Gini => 1.0 - p * p - q * q,
            Criterion::Entropy => {
                let h = |v: f64| if v > 0.0 { -v * libm::log2(v) } else { 0.0 };
                h(p) + h(q)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn eval(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn features_used(&self) -> BTreeSet<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SplitRule {
    /// Exhaustive search over every boundary between distinct values.
    Best,
    /// One uniformly drawn boundary per candidate feature.
    Random,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ClassTreeParams {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    /// Non-constant features to examine per node, already clamped to the
    /// column count.
    pub max_features: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub rule: SplitRule,
}

struct Candidate {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Lower weighted child impurity wins; ties go to the lower column, then
    /// the lower threshold.
    fn beats(&self, other: &Option<Candidate>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.score < o.score
                    || (self.score == o.score
                        && (self.feature < o.feature
                            || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

/// Grows a classification tree whose leaves hold the fraction of positives.
pub(crate) fn grow_classifier(
    data: &DataView<'_>,
    y: &[u8],
    indices: Vec<usize>,
    params: &ClassTreeParams,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let mut nodes: Vec<Node> = Vec::new();
    // (slot to fill, samples, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    nodes.push(Node::Leaf { value: 0.0 });
    stack.push((0, indices, 0));
    let mut features: Vec<usize> = (0..data.n_cols).collect();
    let mut pairs: Vec<(f64, u8)> = Vec::new();

    while let Some((slot, idx, depth)) = stack.pop() {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| y[i] != 0).count();
        let leaf_value = pos as f64 / n as f64;
        let stop = pos == 0
            || pos == n
            || n < params.min_samples_split
            || n < 2 * params.min_samples_leaf
            || params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            nodes[slot] = Node::Leaf { value: leaf_value };
            continue;
        }

        features.shuffle(rng);
        let mut best: Option<Candidate> = None;
        let mut visited = 0;
        for &f in &features {
            if visited == params.max_features {
                break;
            }
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (data.get(i, f), y[i])));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            visited += 1;
            let cand = match params.rule {
                SplitRule::Best => best_boundary(&pairs, pos, params),
                SplitRule::Random => random_boundary(&pairs, pos, params, rng),
            };
            if let Some((score, threshold)) = cand {
                let c = Candidate {
                    score,
                    feature: f,
                    threshold,
                };
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }

        let Some(best) = best else {
            nodes[slot] = Node::Leaf { value: leaf_value };
            continue;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| data.get(i, best.feature) <= best.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[slot] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        stack.push((right, right_idx, depth + 1));
        stack.push((left, left_idx, depth + 1));
    }
    Tree { nodes }
}

fn weighted_impurity(
    criterion: Criterion,
    left_n: usize,
    left_pos: usize,
    n: usize,
    pos: usize,
) -> f64 {
    let right_n = n - left_n;
    let right_pos = pos - left_pos;
    (left_n as f64 * criterion.impurity(left_pos, left_n)
        + right_n as f64 * criterion.impurity(right_pos, right_n))
        / n as f64
}

/// Scans `pairs` (sorted by value) for the lowest weighted impurity.
fn best_boundary(pairs: &[(f64, u8)], pos: usize, params: &ClassTreeParams) -> Option<(f64, f64)> {
    let n = pairs.len();
    let mut left_pos = 0;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        left_pos += pairs[i].1 as usize;
        let left_n = i + 1;
        if pairs[i].0 == pairs[i + 1].0
            || left_n < params.min_samples_leaf
            || n - left_n < params.min_samples_leaf
        {
            continue;
        }
        let score = weighted_impurity(params.criterion, left_n, left_pos, n, pos);
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, pairs[i].0));
        }
    }
    best
}

/// Picks one boundary between consecutive distinct values uniformly.
fn random_boundary(
    pairs: &[(f64, u8)],
    pos: usize,
    params: &ClassTreeParams,
    rng: &mut ChaCha8Rng,
) -> Option<(f64, f64)> {
    let n = pairs.len();
    let boundaries: Vec<usize> = (0..n - 1)
        .filter(|&i| {
            pairs[i].0 != pairs[i + 1].0
                && i >= params.min_samples_leaf.saturating_sub(1)
                && n - i > params.min_samples_leaf
        })
        .collect();
    if boundaries.is_empty() {
        return None;
    }
    let i = boundaries[rng.random_range(0..boundaries.len())];
    let left_pos = pairs[..=i].iter().filter(|p| p.1 != 0).count();
    Some((
        weighted_impurity(params.criterion, i + 1, left_pos, n, pos),
        pairs[i].0,
    ))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RegTreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_weight: f64,
    /// Multiplied into every leaf weight.
    pub shrinkage: f64,
}

struct LevelNode {
    slot: usize,
    g: f64,
    h: f64,
    acc_g: f64,
    acc_h: f64,
    acc_n: usize,
    last: f64,
    best: Option<(f64, usize, f64)>,
}

/// Second-order regression tree on gradients `grad` and hessians `hess`.
/// `sorted[f]` lists every training row ordered by column `f`.
/// Leaves hold `-shrinkage * G / (H + lambda)`.
pub(crate) fn grow_regressor(
    data: &DataView<'_>,
    grad: &[f64],
    hess: &[f64],
    sorted: &[Vec<usize>],
    params: &RegTreeParams,
) -> Tree {
    let n = grad.len();
    let score = |g: f64, h: f64| g * g / (h + params.lambda);
    let leaf = |g: f64, h: f64| -params.shrinkage * g / (h + params.lambda);

    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut slot_of: Vec<Option<usize>> = vec![Some(0); n];
    let mut level = vec![LevelNode {
        slot: 0,
        g: grad.iter().sum(),
        h: hess.iter().sum(),
        acc_g: 0.0,
        acc_h: 0.0,
        acc_n: 0,
        last: 0.0,
        best: None,
    }];

    for depth in 0..=params.max_depth {
        if level.is_empty() {
            break;
        }
        if depth < params.max_depth {
            for (f, order) in sorted.iter().enumerate() {
                for w in level.iter_mut() {
                    w.acc_g = 0.0;
                    w.acc_h = 0.0;
                    w.acc_n = 0;
                }
                for &s in order {
                    let Some(k) = slot_of[s] else { continue };
                    let w = &mut level[k];
                    let x = data.get(s, f);
                    if w.acc_n > 0 && x > w.last {
                        let (gl, hl) = (w.acc_g, w.acc_h);
                        let (gr, hr) = (w.g - gl, w.h - hl);
                        if hl >= params.min_child_weight && hr >= params.min_child_weight {
                            let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(w.g, w.h));
                            if gain > 0.0 && w.best.is_none_or(|(b, _, _)| gain > b) {
                                w.best = Some((gain, f, w.last));
                            }
                        }
                    }
                    w.acc_g += grad[s];
                    w.acc_h += hess[s];
                    w.acc_n += 1;
                    w.last = x;
                }
            }
        }

        let mut next: Vec<LevelNode> = Vec::new();
        // child index in `next` per (level node, side)
        let mut children: Vec<Option<(usize, usize, usize, f64)>> = Vec::with_capacity(level.len());
        for w in &level {
            match w.best {
                Some((_, feature, threshold)) => {
                    let left = nodes.len();
                    nodes.push(Node::Leaf { value: 0.0 });
                    let right = nodes.len();
                    nodes.push(Node::Leaf { value: 0.0 });
                    nodes[w.slot] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    let base = next.len();
                    for slot in [left, right] {
                        next.push(LevelNode {
                            slot,
                            g: 0.0,
                            h: 0.0,
                            acc_g: 0.0,
                            acc_h: 0.0,
                            acc_n: 0,
                            last: 0.0,
                            best: None,
                        });
                    }
                    children.push(Some((base, base + 1, feature, threshold)));
                }
                None => {
                    nodes[w.slot] = Node::Leaf {
                        value: leaf(w.g, w.h),
                    };
                    children.push(None);
                }
            }
        }
        for s in 0..n {
            let Some(k) = slot_of[s] else { continue };
            slot_of[s] = children[k].map(|(l, r, f, t)| if data.get(s, f) <= t { l } else { r });
            if let Some(c) = slot_of[s] {
                next[c].g += grad[s];
                next[c].h += hess[s];
            }
        }
        level = next;
    }
    Tree { nodes }
}
