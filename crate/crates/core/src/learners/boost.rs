//! Gradient boosted trees on the logistic loss with Newton leaf weights.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::params::{Hyperparams, Schema};
use super::tree::{grow_regressor, RegTreeParams, Tree};
use super::{sigmoid, DataView};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BoostConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    pub min_child_weight: f64,
}

impl BoostConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("gradient_boosted_trees", p);
        let cfg = Self {
            n_rounds: s.usize_min("iterations", 100, 0)?,
            learning_rate: s.f64_in("learning_rate", 0.3, |v| v > 0.0, "a positive number")?,
            max_depth: s.usize_min("max_depth", 6, 0)?,
            lambda: s.f64_in("lambda", 1.0, |v| v >= 0.0, "a non-negative number")?,
            min_child_weight: s.f64_in(
                "min_child_weight",
                1.0,
                |v| v >= 0.0,
                "a non-negative number",
            )?,
        };
        s.finish()?;
        Ok(cfg)
    }

    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8]) -> Boosted {
        let n = data.n_rows();
        let pos = y.iter().filter(|&&v| v != 0).count() as f64;
        let prior = (pos / n as f64).clamp(1e-12, 1.0 - 1e-12);
        let base = libm::log(prior / (1.0 - prior));

        let sorted: Vec<Vec<usize>> = (0..data.n_cols)
            .map(|f| {
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| data.get(a, f).total_cmp(&data.get(b, f)));
                order
            })
            .collect();
        let params = RegTreeParams {
            max_depth: self.max_depth,
            lambda: self.lambda,
            min_child_weight: self.min_child_weight,
            shrinkage: self.learning_rate,
        };

        let mut margin = alloc::vec![base; n];
        let mut grad = alloc::vec![0.0; n];
        let mut hess = alloc::vec![0.0; n];
        let mut trees = Vec::with_capacity(self.n_rounds);
        for _ in 0..self.n_rounds {
            for i in 0..n {
                let p = sigmoid(margin[i]);
                grad[i] = p - f64::from(y[i]);
                hess[i] = (p * (1.0 - p)).max(1e-16);
            }
            let tree = grow_regressor(data, &grad, &hess, &sorted, &params);
            for (i, m) in margin.iter_mut().enumerate() {
                *m += tree.eval(data.row(i));
            }
            trees.push(tree);
        }
        Boosted { base, trees }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    /// Prior log-odds of the positive class.
    pub base: f64,
    pub trees: Vec<Tree>,
}

impl Boosted {
    pub fn margin(&self, row: &[f64]) -> f64 {
        self.base + self.trees.iter().map(|t| t.eval(row)).sum::<f64>()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}
