//! k-nearest neighbours by Euclidean distance.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::params::{Hyperparams, Schema};
use super::DataView;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
}

impl KnnConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("k_nearest", p);
        let cfg = Self {
            k: s.usize_min("k", 5, 1)?,
        };
        s.finish()?;
        Ok(cfg)
    }

    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8]) -> Knn {
        Knn {
            k: self.k.min(data.n_rows()),
            n_cols: data.n_cols,
            points: data.data.to_vec(),
            labels: y.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub n_cols: usize,
    pub points: Vec<f64>,
    pub labels: Vec<u8>,
}

impl Knn {
    /// Fraction of positives among the `k` nearest training points. Equal
    /// distances are broken by training order.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut dist: Vec<(f64, usize)> = self
            .points
            .chunks_exact(self.n_cols)
            .enumerate()
            .map(|(i, p)| {
                let d2: f64 = p.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (d2, i)
            })
            .collect();
        dist.select_nth_unstable_by(self.k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let pos = dist[..self.k]
            .iter()
            .filter(|(_, i)| self.labels[*i] != 0)
            .count();
        pos as f64 / self.k as f64
    }
}
