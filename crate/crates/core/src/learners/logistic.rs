//! L2-regularized logistic regression fitted by damped Newton iterations.
//!
//! Objective over parameters `theta = [w_0, .., w_{d-1}, b]`:
//!
//! ```text
//! J(theta) = 0.5 / C * |w|^2 + sum_i [ softplus(z_i) - y_i z_i ],  z_i = w.x_i + b
//! ```
//!
//! The intercept is not penalized.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::params::{Hyperparams, Schema};
use super::{sigmoid, DataView};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl LogisticConfig {
    pub fn from_params(p: &Hyperparams) -> Result<Self> {
        let mut s = Schema::new("logistic_regression", p);
        let cfg = Self {
            c: s.f64_in("c", 1.0, |v| v > 0.0, "a positive number")?,
            tol: s.f64_in("tol", 1e-6, |v| v > 0.0, "a positive number")?,
            max_iter: s.usize_min("max_iter", 1000, 1)?,
        };
        s.finish()?;
        Ok(cfg)
    }

    pub(crate) fn fit(&self, data: &DataView<'_>, y: &[u8]) -> Result<Logistic> {
        let d = data.n_cols;
        let lambda = 1.0 / self.c;
        let mut theta = vec![0.0; d + 1];
        let (mut obj, mut grad) = objective_and_gradient(&theta, data, y, lambda);
        for iter in 0..self.max_iter {
            let gnorm = norm(&grad);
            if gnorm < self.tol {
                return Ok(Logistic::from_theta(&theta));
            }
            let hess = hessian(&theta, data, lambda);
            let step = solve_spd(hess, &grad, d + 1)
                .unwrap_or_else(|| grad.iter().map(|g| g / (1.0 + gnorm)).collect());
            // backtracking on the Newton direction -step
            let slope: f64 = -step.iter().zip(&grad).map(|(s, g)| s * g).sum::<f64>();
            let mut t = 1.0;
            let mut accepted = false;
            while t > 1e-12 {
                let trial: Vec<f64> = theta.iter().zip(&step).map(|(p, s)| p - t * s).collect();
                let (trial_obj, trial_grad) = objective_and_gradient(&trial, data, y, lambda);
                if trial_obj <= obj + 1e-4 * t * slope || norm(&trial_grad) < 0.5 * gnorm {
                    theta = trial;
                    obj = trial_obj;
                    grad = trial_grad;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::Divergence {
                    iterations: iter + 1,
                    gradient_norm: norm(&grad),
                });
            }
        }
        let gradient_norm = norm(&grad);
        if gradient_norm < self.tol {
            return Ok(Logistic::from_theta(&theta));
        }
        Err(Error::Divergence {
            iterations: self.max_iter,
            gradient_norm,
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Regularized log-loss and its gradient at `theta` (weights then bias).
pub fn objective_and_gradient(
    theta: &[f64],
    data: &DataView<'_>,
    y: &[u8],
    lambda: f64,
) -> (f64, Vec<f64>) {
    let d = data.n_cols;
    let (w, b) = (&theta[..d], theta[d]);
    let mut obj = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    let mut grad: Vec<f64> = w.iter().map(|v| lambda * v).collect();
    grad.push(0.0);
    for (i, x) in data.rows().enumerate() {
        let z = b + w.iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
        let yi = f64::from(y[i]);
        obj += softplus(z) - yi * z;
        let r = sigmoid(z) - yi;
        for (g, v) in grad[..d].iter_mut().zip(x) {
            *g += r * v;
        }
        grad[d] += r;
    }
    (obj, grad)
}

fn hessian(theta: &[f64], data: &DataView<'_>, lambda: f64) -> Vec<f64> {
    let d = data.n_cols;
    let m = d + 1;
    let mut h = vec![0.0; m * m];
    for j in 0..d {
        h[j * m + j] = lambda;
    }
    let mut xt = vec![1.0; m];
    for x in data.rows() {
        let z = theta[d] + theta[..d].iter().zip(x).map(|(a, c)| a * c).sum::<f64>();
        let p = sigmoid(z);
        let wgt = p * (1.0 - p);
        xt[..d].copy_from_slice(x);
        for a in 0..m {
            let s = wgt * xt[a];
            for b in 0..=a {
                h[a * m + b] += s * xt[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            h[b * m + a] = h[a * m + b];
        }
    }
    h
}

/// Solves `A x = rhs` for symmetric positive-definite `A` by Cholesky.
/// Returns `None` when `A` is not numerically positive definite.
fn solve_spd(mut a: Vec<f64>, rhs: &[f64], m: usize) -> Option<Vec<f64>> {
    for j in 0..m {
        let mut s = a[j * m + j];
        for k in 0..j {
            s -= a[j * m + k] * a[j * m + k];
        }
        if !(s > 1e-300) {
            return None;
        }
        let l = libm::sqrt(s);
        a[j * m + j] = l;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / l;
        }
    }
    let mut z = vec![0.0; m];
    for i in 0..m {
        let mut s = rhs[i];
        for k in 0..i {
            s -= a[i * m + k] * z[k];
        }
        z[i] = s / a[i * m + i];
    }
    let mut x = vec![0.0; m];
    for i in (0..m).rev() {
        let mut s = z[i];
        for k in i + 1..m {
            s -= a[k * m + i] * x[k];
        }
        x[i] = s / a[i * m + i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl Logistic {
    fn from_theta(theta: &[f64]) -> Self {
        let d = theta.len() - 1;
        Self {
            weights: theta[..d].to_vec(),
            bias: theta[d],
        }
    }

    pub fn margin(&self, row: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}
