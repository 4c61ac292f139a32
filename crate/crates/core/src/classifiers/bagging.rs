use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

use super::{ClassifierSpec, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggingParams {
    pub seed: u64,
    pub members: Vec<ModelParams>,
}

/// `size` bootstrap samples of `0..n`, drawn in order from one seeded stream.
pub fn bootstrap_indices(n: usize, size: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect())
        .collect()
}

pub(super) fn train(data: &FeatureMatrix, size: usize, seed: u64, base: &ClassifierSpec) -> Result<BaggingParams> {
    if size == 0 {
        return Err(Error::config("bagging needs at least one member"));
    }
    let samples = bootstrap_indices(data.len(), size, seed);
    let members = samples
        .par_iter()
        .map(|idx| base.train_params(&data.subset(idx)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BaggingParams { seed, members })
}

impl BaggingParams {
    pub(super) fn distribution(&self, x: &SparseVector, n_classes: usize) -> Vec<f64> {
        let mut acc = vec![0.0; n_classes];
        for m in &self.members {
            for (a, p) in acc.iter_mut().zip(m.distribution(x, n_classes)) {
                *a += p;
            }
        }
        let b = self.members.len() as f64;
        acc.into_iter().map(|a| a / b).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::matrix;
    use super::*;

    #[test]
    fn bootstrap_replays_from_seed() {
        let a = bootstrap_indices(50, 10, 7);
        assert_eq!(a, bootstrap_indices(50, 10, 7));
        assert_ne!(a, bootstrap_indices(50, 10, 8));
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|s| s.len() == 50 && s.iter().all(|&i| i < 50)));

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let first: Vec<usize> = (0..50).map(|_| rng.gen_range(0..50)).collect();
        assert_eq!(a[0], first);
    }

    #[test]
    fn members_are_trees_on_their_bootstrap() {
        let data = matrix(
            &[
                vec![0.0, 1.0],
                vec![1.0, 0.0],
                vec![2.0, 1.0],
                vec![0.0, 3.0],
                vec![1.0, 1.0],
            ],
            &[0, 1, 1, 0, 1],
            2,
        );
        let base = ClassifierSpec::decision_tree();
        let params = train(&data, 4, 11, &base).unwrap();
        for (member, idx) in params.members.iter().zip(bootstrap_indices(5, 4, 11)) {
            let alone = base.train_params(&data.subset(&idx)).unwrap();
            assert_eq!(member, &alone);
        }
        let x = SparseVector::from_dense(&[1.0, 1.0]).unwrap();
        let avg = params.distribution(&x, 2);
        let expected: f64 = params.members.iter().map(|m| m.distribution(&x, 2)[0]).sum::<f64>() / 4.0;
        assert!((avg[0] - expected).abs() < 1e-15);
        assert!(train(&data, 0, 1, &base).is_err());
    }
}
