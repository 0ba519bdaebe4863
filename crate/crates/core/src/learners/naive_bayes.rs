//! Gaussian naive Bayes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::params::{Hyperparams, Schema};
use super::DataView;
use crate::error::Result;

fn sq(v: f64) -> f64 {
    v * v
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNbConfig {
    /// Added to every variance, as a fraction of the largest column variance.
    pub var_smoothing: f64,
}

impl GaussianNbConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("gaussian_nb", p);
        let cfg = Self {
            var_smoothing: s.f64_in("var_smoothing", 1e-9, |v| v >= 0.0, "a non-negative number")?,
        };
        s.finish()?;
        Ok(cfg)
    }

    /// Requires both classes to be present.
    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8]) -> GaussianNb {
        let d = data.n_cols;
        let n = data.n_rows();
        let mut max_var: f64 = 0.0;
        for f in 0..d {
            let mean = (0..n).map(|i| data.get(i, f)).sum::<f64>() / n as f64;
            let var = (0..n).map(|i| sq(data.get(i, f) - mean)).sum::<f64>() / n as f64;
            max_var = max_var.max(var);
        }
        let epsilon = self.var_smoothing * max_var;

        let mut classes = Vec::with_capacity(2);
        for label in [0u8, 1u8] {
            let rows: Vec<usize> = (0..n).filter(|&i| y[i] == label).collect();
            let m = rows.len() as f64;
            let mut mean = vec![0.0; d];
            let mut var = vec![0.0; d];
            for f in 0..d {
                mean[f] = rows.iter().map(|&i| data.get(i, f)).sum::<f64>() / m;
                var[f] = rows.iter().map(|&i| sq(data.get(i, f) - mean[f])).sum::<f64>() / m
                    + epsilon;
                if var[f] == 0.0 {
                    // every column constant and var_smoothing = 0
                    var[f] = f64::MIN_POSITIVE;
                }
            }
            classes.push(ClassGaussian {
                log_prior: libm::log(m / n as f64),
                mean,
                var,
            });
        }
        GaussianNb { classes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussian {
    pub log_prior: f64,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl ClassGaussian {
    fn joint_log_likelihood(&self, row: &[f64]) -> f64 {
        let mut ll = self.log_prior;
        for ((x, m), v) in row.iter().zip(&self.mean).zip(&self.var) {
            ll -= 0.5 * libm::log(2.0 * core::f64::consts::PI * v) + (x - m) * (x - m) / (2.0 * v);
        }
        ll
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    /// Index 0 is the negative class, 1 the positive class.
    pub classes: Vec<ClassGaussian>,
}

impl GaussianNb {
    /// Posterior probability of the positive class.
    pub fn score(&self, row: &[f64]) -> f64 {
        let l0 = self.classes[0].joint_log_likelihood(row);
        let l1 = self.classes[1].joint_log_likelihood(row);
        super::sigmoid(l1 - l0)
    }
}
