//! Fully connected ReLU network with a single sigmoid output, trained by
//! mini-batch gradient descent with momentum on the binary cross-entropy.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::params::{Hyperparams, Schema};
use super::{sigmoid, DataView};
use crate::error::{Error, Result};

pub const DEFAULT_HIDDEN: [usize; 8] = [128, 64, 32, 32, 16, 16, 8, 8];

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// L2 penalty on weights (not biases).
    pub alpha: f64,
    /// Minimum epoch-loss improvement that resets the plateau counter.
    pub tol: f64,
    pub n_iter_no_change: usize,
}

impl MlpConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("mlp", p);
        s.text("activation", "relu", &["relu"])?;
        let cfg = Self {
            hidden: s.usize_list("hidden", &DEFAULT_HIDDEN)?,
            learning_rate: s.f64_in("learning_rate", 1e-3, |v| v > 0.0, "a positive number")?,
            momentum: s.f64_in("momentum", 0.9, |v| (0.0..1.0).contains(&v), "in [0, 1)")?,
            batch_size: s.usize_min("batch_size", 32, 1)?,
            max_epochs: s.usize_min("iterations", 1000, 1)?,
            alpha: s.f64_in("alpha", 1e-4, |v| v >= 0.0, "a non-negative number")?,
            tol: s.f64_in("tol", 1e-4, |v| v >= 0.0, "a non-negative number")?,
            n_iter_no_change: s.usize_min("n_iter_no_change", 10, 1)?,
        };
        s.finish()?;
        Ok(cfg)
    }

    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8], seed: u64) -> Result<Network> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Network::init(data.n_cols, &self.hidden, &mut rng);
        let n = data.n_rows();
        let mut params = net.params();
        let mut velocity = vec![0.0; params.len()];
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        let mut stale = 0;
        for epoch in 0..self.max_epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(self.batch_size) {
                let (loss, grad) = net.loss_and_gradient(data, y, batch, self.alpha);
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        iterations: epoch + 1,
                        gradient_norm: f64::NAN,
                    });
                }
                epoch_loss += loss * batch.len() as f64;
                for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(&grad) {
                    *v = self.momentum * *v - self.learning_rate * g;
                    *p += *v;
                }
                net.set_params(&params);
            }
            epoch_loss /= n as f64;
            if epoch_loss > best - self.tol {
                stale += 1;
            } else {
                stale = 0;
            }
            best = best.min(epoch_loss);
            if stale > self.n_iter_no_change {
                break;
            }
        }
        Ok(net)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `n_out x n_in`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    /// Glorot-uniform initialization of weights and biases.
    pub fn init(n_inputs: usize, hidden: &[usize], rng: &mut ChaCha8Rng) -> Self {
        let mut sizes = vec![n_inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (n_in, n_out) = (w[0], w[1]);
                let factor = if k == last { 2.0 } else { 6.0 };
                let bound = libm::sqrt(factor / (n_in + n_out) as f64);
                let mut draw = || rng.random_range(-bound..bound);
                let weights = (0..n_in * n_out).map(|_| draw()).collect();
                let biases = (0..n_out).map(|_| draw()).collect();
                Layer {
                    n_in,
                    n_out,
                    weights,
                    biases,
                }
            })
            .collect();
        Self { layers }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flattened parameters: per layer, weights then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
    }

    fn forward_into(&self, row: &[f64], acts: &mut Vec<Vec<f64>>) -> f64 {
        acts.clear();
        acts.push(row.to_vec());
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            let input = &acts[k];
            let mut out = Vec::with_capacity(l.n_out);
            for o in 0..l.n_out {
                let w = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                let z = l.biases[o] + w.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                out.push(if k == last { z } else { z.max(0.0) });
            }
            acts.push(out);
        }
        acts[self.layers.len()][0]
    }

    /// Pre-sigmoid output.
    pub fn margin(&self, row: &[f64]) -> f64 {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        self.forward_into(row, &mut acts)
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }

    /// Mean cross-entropy over `rows` plus `alpha / (2 m) * |W|^2`, and the
    /// gradient in [`Network::params`] layout.
    pub fn loss_and_gradient(
        &self,
        data: &DataView<'_>,
        y: &[u8],
        rows: &[usize],
        alpha: f64,
    ) -> (f64, Vec<f64>) {
        let m = rows.len() as f64;
        let mut grads: Vec<(Vec<f64>, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| (vec![0.0; l.weights.len()], vec![0.0; l.biases.len()]))
            .collect();
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut loss = 0.0;
        for &i in rows {
            let z = self.forward_into(data.row(i), &mut acts);
            let yi = f64::from(y[i]);
            loss += if z > 0.0 {
                z + libm::log1p(libm::exp(-z))
            } else {
                libm::log1p(libm::exp(z))
            } - yi * z;
            let mut delta = vec![(sigmoid(z) - yi) / m];
            for k in (0..self.layers.len()).rev() {
                let l = &self.layers[k];
                let input = &acts[k];
                let (gw, gb) = &mut grads[k];
                for o in 0..l.n_out {
                    gb[o] += delta[o];
                    let row = &mut gw[o * l.n_in..(o + 1) * l.n_in];
                    for (g, a) in row.iter_mut().zip(input) {
                        *g += delta[o] * a;
                    }
                }
                if k == 0 {
                    break;
                }
                let mut prev = vec![0.0; l.n_in];
                for o in 0..l.n_out {
                    let w = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                    for (p, wv) in prev.iter_mut().zip(w) {
                        *p += delta[o] * wv;
                    }
                }
                // ReLU derivative, taken as 0 at the kink
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
        loss /= m;
        let mut sq = 0.0;
        for (l, (gw, _)) in self.layers.iter().zip(grads.iter_mut()) {
            for (g, w) in gw.iter_mut().zip(&l.weights) {
                sq += w * w;
                *g += alpha * w / m;
            }
        }
        loss += alpha * sq / (2.0 * m);
        let mut flat = Vec::with_capacity(self.n_params());
        for (gw, gb) in grads {
            flat.extend(gw);
            flat.extend(gb);
        }
        (loss, flat)
    }
}
