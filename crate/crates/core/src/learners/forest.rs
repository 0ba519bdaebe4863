//! Single CART tree and the extremely randomized tree ensemble.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{Hyperparams, Schema};
use super::tree::{grow_classifier, ClassTreeParams, Criterion, SplitRule, Tree};
use super::DataView;
use crate::error::Result;

fn criterion(name: &str) -> Criterion {
    match name {
        "entropy" => Criterion::Entropy,
        _ => Criterion::Gini,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTreeConfig {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
}

impl DecisionTreeConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("decision_tree", p);
        let cfg = Self {
            criterion: criterion(&s.text("impurity", "gini", &["gini", "entropy"])?),
            max_depth: s.opt_usize("max_depth", None)?,
            max_features: s.opt_usize("max_features", None)?,
            min_samples_split: s.usize_min("min_samples_split", 2, 2)?,
            min_samples_leaf: s.usize_min("min_samples_leaf", 1, 1)?,
        };
        s.finish()?;
        Ok(cfg)
    }

    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8], seed: u64) -> Tree {
        let params = ClassTreeParams {
            criterion: self.criterion,
            max_depth: self.max_depth,
            // narrower feature sets than max_features are clamped
            max_features: self.max_features.unwrap_or(data.n_cols).min(data.n_cols),
            min_samples_split: self.min_samples_split,
            min_samples_leaf: self.min_samples_leaf,
            rule: SplitRule::Best,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        grow_classifier(data, y, (0..data.n_rows()).collect(), &params, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtraTreesConfig {
    pub n_estimators: usize,
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    /// `None` means `floor(sqrt(n_cols))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
}

impl ExtraTreesConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("extra_trees", p);
        let cfg = Self {
            n_estimators: s.usize_min("n_estimators", 100, 1)?,
            criterion: criterion(&s.text("criterion", "gini", &["gini", "entropy"])?),
            max_depth: s.opt_usize("max_depth", None)?,
            max_features: s.opt_usize("max_features", None)?,
            min_samples_split: s.usize_min("min_samples_split", 2, 2)?,
        };
        s.finish()?;
        Ok(cfg)
    }

    /// Tree `i` draws from the ChaCha stream `i` of `seed`, so the ensemble
    /// does not depend on how trees are scheduled.
    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8], seed: u64) -> Vec<Tree> {
        let sqrt = (libm::sqrt(data.n_cols as f64) as usize).max(1);
        let params = ClassTreeParams {
            criterion: self.criterion,
            max_depth: self.max_depth,
            max_features: self.max_features.unwrap_or(sqrt).min(data.n_cols),
            min_samples_split: self.min_samples_split,
            min_samples_leaf: 1,
            rule: SplitRule::Random,
        };
        (0..self.n_estimators)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                grow_classifier(data, y, (0..data.n_rows()).collect(), &params, &mut rng)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn score(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.eval(row)).sum::<f64>() / self.trees.len() as f64
    }
}
