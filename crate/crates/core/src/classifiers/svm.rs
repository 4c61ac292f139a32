use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

use super::normalize;

const VISIT_ORDER_SEED: u64 = 0x5eed;

/// Linear machine separating class `positive` from class `negative`.
/// `f(x) >= 0` votes for `positive`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMachine {
    pub positive: usize,
    pub negative: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub passes: usize,
}

impl PairwiseMachine {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }
}

/// One-vs-one linear SVM: one machine per class pair `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub machines: Vec<PairwiseMachine>,
}

pub(super) fn train(data: &FeatureMatrix, c: f64, tolerance: f64, max_passes: usize) -> Result<SvmParams> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::config(format!("SVM cost must be positive, got {c}")));
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::config("SVM tolerance must be positive"));
    }
    let k = data.n_classes();
    if k < 2 {
        return Err(Error::dataset("an SVM needs at least two classes"));
    }
    let mut machines = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let mut rows = Vec::new();
            let mut targets = Vec::new();
            for (r, &y) in data.labels().iter().enumerate() {
                if y == i || y == j {
                    rows.push(&data.rows()[r]);
                    targets.push(if y == i { 1.0 } else { -1.0 });
                }
            }
            let (weights, bias, passes) =
                dual_coordinate_descent(&rows, &targets, data.n_features(), c, tolerance, max_passes);
            machines.push(PairwiseMachine {
                positive: i,
                negative: j,
                weights,
                bias,
                passes,
            });
        }
    }
    Ok(SvmParams { c, machines })
}

/// Solves `min 1/2 (|w|^2 + b^2) + C sum_i max(0, 1 - y_i (w.x_i + b))`
/// through its box-constrained dual, one coordinate at a time.
///
/// Stops once the spread of the projected gradient over a pass is at most
/// `tolerance`, or after `max_passes` passes.
fn dual_coordinate_descent(
    rows: &[&SparseVector],
    targets: &[f64],
    dim: usize,
    c: f64,
    tolerance: f64,
    max_passes: usize,
) -> (Vec<f64>, f64, usize) {
    let n = rows.len();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let q: Vec<f64> = rows
        .iter()
        .map(|x| x.entries().iter().map(|(_, v)| v * v).sum::<f64>() + 1.0)
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(VISIT_ORDER_SEED);
    let mut passes = 0;
    while passes < max_passes && n > 0 {
        passes += 1;
        order.shuffle(&mut rng);
        let mut max_pg = f64::NEG_INFINITY;
        let mut min_pg = f64::INFINITY;
        for &i in &order {
            let y = targets[i];
            let g = y * (rows[i].dot(&w) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg);
            min_pg = min_pg.min(pg);
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * y;
                if delta != 0.0 {
                    for &(j, v) in rows[i].entries() {
                        w[j] += delta * v;
                    }
                    b += delta;
                }
            }
        }
        if max_pg - min_pg <= tolerance {
            break;
        }
    }
    (w, b, passes)
}

impl SvmParams {
    pub(super) fn distribution(&self, x: &SparseVector, n_classes: usize) -> Vec<f64> {
        let mut votes = vec![0.0; n_classes];
        for m in &self.machines {
            if m.decision(x) >= 0.0 {
                votes[m.positive] += 1.0;
            } else {
                votes[m.negative] += 1.0;
            }
        }
        normalize(votes)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::matrix;
    use super::super::ClassifierSpec;
    use super::*;

    fn primal(w: f64, b: f64, xs: &[f64], ys: &[f64], c: f64) -> f64 {
        let hinge: f64 = xs.iter().zip(ys).map(|(x, y)| (1.0 - y * (w * x + b)).max(0.0)).sum();
        0.5 * (w * w + b * b) + c * hinge
    }

    #[test]
    fn two_point_problem_matches_grid_search() {
        let data = matrix(&[vec![1.0], vec![-1.0]], &[0, 1], 2);
        let params = train(&data, 1.0, 1e-6, 10_000).unwrap();
        let m = &params.machines[0];
        assert!((m.weights[0] - 1.0).abs() < 1e-6 && m.bias.abs() < 1e-6, "{m:?}");

        let (xs, ys) = ([1.0, -1.0], [1.0, -1.0]);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for wi in -300..=300 {
            for bi in -300..=300 {
                let (w, b) = (wi as f64 / 100.0, bi as f64 / 100.0);
                let v = primal(w, b, &xs, &ys, 1.0);
                if v < best.0 {
                    best = (v, w, b);
                }
            }
        }
        assert!((best.1 - 1.0).abs() <= 0.01 && best.2.abs() <= 0.01);
        assert!(primal(m.weights[0], m.bias, &xs, &ys, 1.0) <= best.0 + 1e-9);
    }

    #[test]
    fn pairwise_votes_and_tie_rule() {
        let data = matrix(
            &[
                vec![4.0, 0.0],
                vec![0.0, 4.0],
                vec![0.0, 0.0],
                vec![3.0, 0.0],
                vec![0.0, 3.0],
                vec![0.0, 0.0],
            ],
            &[0, 1, 2, 0, 1, 2],
            3,
        );
        let model = ClassifierSpec::linear_svm().train(&data).unwrap();
        let crate::classifiers::ModelParams::LinearSvm(params) = model.params() else {
            panic!()
        };
        let pairs: Vec<_> = params.machines.iter().map(|m| (m.positive, m.negative)).collect();
        assert_eq!(pairs, [(0, 1), (0, 2), (1, 2)]);
        for (row, &y) in data.rows().iter().zip(data.labels()) {
            assert_eq!(model.predict(row).unwrap().label, y);
        }

        let tied = SvmParams {
            c: 1.0,
            machines: vec![PairwiseMachine {
                positive: 0,
                negative: 1,
                weights: vec![0.0],
                bias: 0.0,
                passes: 0,
            }],
        };
        assert_eq!(tied.distribution(&SparseVector::zeros(1), 2), [1.0, 0.0]);
    }

    #[test]
    fn needs_two_classes() {
        let data = matrix(&[vec![1.0]], &[0], 1);
        assert!(train(&data, 1.0, 1e-3, 10).is_err());
        let data = matrix(&[vec![1.0]], &[0], 2);
        assert!(train(&data, 0.0, 1e-3, 10).is_err());
    }
}
