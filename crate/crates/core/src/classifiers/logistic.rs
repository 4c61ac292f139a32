use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

use super::softmax;

/// Multinomial logistic regression weights, one row and bias per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub ridge: f64,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub iterations: usize,
}

/// Penalized negative log-likelihood
/// `-sum_i ln p(y_i | x_i) + ridge * ||W||^2`, with unpenalized biases.
///
/// Parameters are laid out feature-major: weight `(j, c)` of feature `j` and
/// class `c` sits at `j * n_classes + c`, followed by the `n_classes` biases.
pub struct LogisticObjective<'a> {
    data: &'a FeatureMatrix,
    ridge: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(data: &'a FeatureMatrix, ridge: f64) -> Self {
        Self { data, ridge }
    }

    pub fn dim(&self) -> usize {
        self.data.n_classes() * (self.data.n_features() + 1)
    }

    fn logits(&self, theta: &[f64], x: &SparseVector, out: &mut [f64]) {
        let k = out.len();
        let d = self.data.n_features();
        out.copy_from_slice(&theta[d * k..]);
        for &(j, v) in x.entries() {
            for (z, w) in out.iter_mut().zip(&theta[j * k..(j + 1) * k]) {
                *z += v * w;
            }
        }
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta, None)
    }

    pub fn value_and_gradient(&self, theta: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.dim()];
        let f = self.evaluate(theta, Some(&mut grad));
        (f, grad)
    }

    fn evaluate(&self, theta: &[f64], mut grad: Option<&mut Vec<f64>>) -> f64 {
        assert_eq!(theta.len(), self.dim(), "parameter vector has the wrong length");
        let k = self.data.n_classes();
        let d = self.data.n_features();
        let mut z = vec![0.0; k];
        let mut r = vec![0.0; k];
        let mut nll = 0.0;
        for (x, &y) in self.data.rows().iter().zip(self.data.labels()) {
            self.logits(theta, x, &mut z);
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            nll += lse - z[y];
            if let Some(g) = grad.as_deref_mut() {
                for c in 0..k {
                    r[c] = (z[c] - lse).exp() - if c == y { 1.0 } else { 0.0 };
                }
                for &(j, v) in x.entries() {
                    for (gi, rc) in g[j * k..(j + 1) * k].iter_mut().zip(&r) {
                        *gi += rc * v;
                    }
                }
                for (gi, rc) in g[d * k..].iter_mut().zip(&r) {
                    *gi += rc;
                }
            }
        }
        let weights = &theta[..d * k];
        let penalty: f64 = weights.iter().map(|w| w * w).sum();
        if let Some(g) = grad {
            for (gi, w) in g.iter_mut().zip(weights) {
                *gi += 2.0 * self.ridge * w;
            }
        }
        nll + self.ridge * penalty
    }
}

const NONMONOTONE_WINDOW: usize = 10;

/// Gradient descent from zero with Barzilai-Borwein step sizes, stopping once
/// every gradient component is at most `tolerance * n_instances` in size or
/// after `max_iter` iterations.
pub(super) fn train(data: &FeatureMatrix, ridge: f64, max_iter: usize, tolerance: f64) -> Result<LogisticParams> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::config(format!("ridge must be non-negative, got {ridge}")));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::config("logistic tolerance must be non-negative"));
    }
    if data
        .rows()
        .iter()
        .any(|r| r.entries().iter().any(|(_, v)| !v.is_finite()))
    {
        return Err(Error::dataset("logistic regression needs finite feature values"));
    }
    let objective = LogisticObjective::new(data, ridge);
    let mut theta = vec![0.0; objective.dim()];
    let (mut f, mut g) = objective.value_and_gradient(&theta);
    let scale = data.len().max(1) as f64;
    let mut step = 1.0 / norm(&g).max(1.0);
    let mut recent = std::collections::VecDeque::from([f]);
    let mut iterations = 0;
    while iterations < max_iter && inf_norm(&g) > tolerance * scale {
        iterations += 1;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        // nonmonotone Armijo test against the worst of the last few values
        let reference = recent.iter().copied().fold(f, f64::max);
        let mut accepted = None;
        for _ in 0..60 {
            let candidate: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
            let (fc, gc) = objective.value_and_gradient(&candidate);
            if fc <= reference - 1e-4 * step * g2 {
                accepted = Some((candidate, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else { break };
        // Barzilai-Borwein step for the next iteration
        let (mut sy, mut ss) = (0.0, 0.0);
        for i in 0..theta.len() {
            let si = next[i] - theta[i];
            sy += si * (g_next[i] - g[i]);
            ss += si * si;
        }
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-12, 1e12)
        } else {
            step * 2.0
        };
        theta = next;
        f = f_next;
        g = g_next;
        recent.push_back(f);
        if recent.len() > NONMONOTONE_WINDOW {
            recent.pop_front();
        }
    }

    let k = data.n_classes();
    let d = data.n_features();
    let weights = (0..k).map(|c| (0..d).map(|j| theta[j * k + c]).collect()).collect();
    let biases = theta[d * k..].to_vec();
    Ok(LogisticParams {
        ridge,
        weights,
        biases,
        iterations,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl LogisticParams {
    pub(super) fn distribution(&self, x: &SparseVector) -> Vec<f64> {
        let scores: Vec<Option<f64>> = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| Some(x.dot(w) + b))
            .collect();
        softmax(&scores)
    }
}
