use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

use super::softmax;

/// Multinomial naive Bayes with additive smoothing.
///
/// `log_priors[c]` is `None` for a class with no training instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbParams {
    pub alpha: f64,
    pub log_priors: Vec<Option<f64>>,
    /// `log_likelihoods[c][w]` is `ln P(w | c)`.
    pub log_likelihoods: Vec<Vec<f64>>,
}

pub(super) fn train(data: &FeatureMatrix, alpha: f64) -> Result<MnbParams> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::config(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let k = data.n_classes();
    let v = data.n_features();
    let mut word_counts = vec![vec![0.0; v]; k];
    for (row, &y) in data.rows().iter().zip(data.labels()) {
        for &(j, x) in row.entries() {
            if x < 0.0 {
                return Err(Error::dataset("multinomial naive Bayes needs non-negative counts"));
            }
            word_counts[y][j] += x;
        }
    }
    let n = data.len() as f64;
    let log_priors = data
        .class_counts()
        .into_iter()
        .map(|c| (c > 0).then(|| (c as f64 / n).ln()))
        .collect();
    let log_likelihoods = word_counts
        .into_iter()
        .map(|counts| {
            let denom = counts.iter().sum::<f64>() + alpha * v as f64;
            counts.into_iter().map(|c| ((c + alpha) / denom).ln()).collect()
        })
        .collect();
    Ok(MnbParams {
        alpha,
        log_priors,
        log_likelihoods,
    })
}

impl MnbParams {
    pub(super) fn distribution(&self, x: &SparseVector) -> Vec<f64> {
        let scores: Vec<Option<f64>> = self
            .log_priors
            .iter()
            .zip(&self.log_likelihoods)
            .map(|(prior, ll)| prior.map(|p| p + x.entries().iter().map(|&(j, v)| v * ll[j]).sum::<f64>()))
            .collect();
        softmax(&scores)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::matrix;
    use super::super::ClassifierSpec;
    use super::*;

    #[test]
    fn hand_computed_likelihoods() {
        // X: "a a b", Y: "b"
        let data = matrix(&[vec![2.0, 1.0], vec![0.0, 1.0]], &[0, 1], 2);
        let p = train(&data, 1.0).unwrap();
        assert!((p.log_likelihoods[0][0].exp() - 3.0 / 5.0).abs() < 1e-15);
        assert!((p.log_likelihoods[0][1].exp() - 2.0 / 5.0).abs() < 1e-15);
        assert!((p.log_likelihoods[1][0].exp() - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.log_likelihoods[1][1].exp() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.log_priors, [Some(0.5f64.ln()), Some(0.5f64.ln())]);
    }

    #[test]
    fn posterior_matches_hand_computation() {
        // X: "a a", Y: "b b", vocabulary {a, b}
        let data = matrix(&[vec![2.0, 0.0], vec![0.0, 2.0]], &[0, 1], 2);
        let p = train(&data, 1.0).unwrap();
        assert!((p.log_likelihoods[0][0].exp() - 0.75).abs() < 1e-15);
        let model = ClassifierSpec::multinomial_nb().train(&data).unwrap();
        let pred = model.predict(&SparseVector::from_dense(&[1.0, 0.0]).unwrap()).unwrap();
        // 0.5 * 3/4 against 0.5 * 1/4
        assert!((pred.distribution[0] - 0.75).abs() < 1e-12);
        assert_eq!(pred.label, 0);
        let pred = model.predict(&SparseVector::from_dense(&[2.0, 1.0]).unwrap()).unwrap();
        let (sx, sy) = (0.75f64 * 0.75 * 0.25, 0.25f64 * 0.25 * 0.75);
        assert!((pred.distribution[0] - sx / (sx + sy)).abs() < 1e-12);
    }

    #[test]
    fn absent_class_gets_zero_probability() {
        let data = matrix(&[vec![1.0], vec![2.0]], &[0, 0], 3);
        let model = ClassifierSpec::multinomial_nb().train(&data).unwrap();
        let pred = model.predict(&SparseVector::from_dense(&[1.0]).unwrap()).unwrap();
        assert_eq!(pred.distribution, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = matrix(&[vec![-1.0]], &[0], 2);
        assert!(train(&data, 1.0).is_err());
        let data = matrix(&[vec![1.0]], &[0], 2);
        assert!(train(&data, 0.0).is_err());
        assert!(train(&data, f64::NAN).is_err());
    }
}
