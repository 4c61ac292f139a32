//! The five classifier families and their shared train/predict contract.
//!
//! Every family trains from a [`FeatureMatrix`] into a [`TrainedModel`],
//! and every model maps a [`SparseVector`] to a class distribution. Ties in
//! the argmax always resolve to the lowest class index.

mod bagging;
mod inspect;
mod logistic;
mod mnb;
mod svm;
mod tree;

pub use bagging::{bootstrap_indices, BaggingParams};
pub use inspect::{inspect_mnb, inspect_tree, MnbSummary, NodeSummary, TreeSummary, WordProbability};
pub use logistic::{LogisticObjective, LogisticParams};
pub use mnb::MnbParams;
pub use svm::{PairwiseMachine, SvmParams};
pub use tree::{best_split, Split, TreeNode, TreeParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, SparseVector};

/// Version tag written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

fn default_alpha() -> f64 {
    1.0
}
fn default_ridge() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    200
}
fn default_tolerance() -> f64 {
    1e-4
}
fn default_c() -> f64 {
    1.0
}
fn default_svm_tolerance() -> f64 {
    1e-3
}
fn default_max_passes() -> usize {
    1000
}
fn default_bag_size() -> usize {
    10
}
fn default_seed() -> u64 {
    1
}
fn default_base() -> Box<ClassifierSpec> {
    Box::new(ClassifierSpec::DecisionTree {
        min_leaf: default_min_leaf(),
    })
}
fn default_min_leaf() -> usize {
    2
}

/// Hyperparameters of one classifier family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClassifierSpec {
    MultinomialNb {
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
    Logistic {
        #[serde(default = "default_ridge")]
        ridge: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default = "default_tolerance")]
        tolerance: f64,
    },
    LinearSvm {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_svm_tolerance")]
        tolerance: f64,
        #[serde(default = "default_max_passes")]
        max_passes: usize,
    },
    Bagging {
        #[serde(default = "default_bag_size")]
        size: usize,
        #[serde(default = "default_seed")]
        seed: u64,
        #[serde(default = "default_base")]
        base: Box<ClassifierSpec>,
    },
    DecisionTree {
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
}

impl ClassifierSpec {
    pub fn multinomial_nb() -> Self {
        Self::MultinomialNb { alpha: default_alpha() }
    }

    pub fn logistic() -> Self {
        Self::Logistic {
            ridge: default_ridge(),
            max_iter: default_max_iter(),
            tolerance: default_tolerance(),
        }
    }

    pub fn linear_svm() -> Self {
        Self::LinearSvm {
            c: default_c(),
            tolerance: default_svm_tolerance(),
            max_passes: default_max_passes(),
        }
    }

    pub fn bagging() -> Self {
        Self::Bagging {
            size: default_bag_size(),
            seed: default_seed(),
            base: default_base(),
        }
    }

    pub fn decision_tree() -> Self {
        Self::DecisionTree {
            min_leaf: default_min_leaf(),
        }
    }

    /// The five families with default settings, in table order.
    pub fn standard_set() -> Vec<ClassifierSpec> {
        vec![
            Self::multinomial_nb(),
            Self::logistic(),
            Self::linear_svm(),
            Self::bagging(),
            Self::decision_tree(),
        ]
    }

    /// Display name used in result tables.
    pub fn name(&self) -> &'static str {
        match self {
            Self::MultinomialNb { .. } => "NaiveBayesMultinomial",
            Self::Logistic { .. } => "Logistic",
            Self::LinearSvm { .. } => "SMO",
            Self::Bagging { .. } => "Bagging",
            Self::DecisionTree { .. } => "J48",
        }
    }

    pub fn train(&self, data: &FeatureMatrix) -> Result<TrainedModel> {
        if data.is_empty() {
            return Err(Error::dataset("cannot train on an empty dataset"));
        }
        let params = self.train_params(data)?;
        Ok(TrainedModel {
            class_labels: data.class_labels().to_vec(),
            feature_names: data.feature_names().to_vec(),
            params,
        })
    }

    fn train_params(&self, data: &FeatureMatrix) -> Result<ModelParams> {
        Ok(match self {
            Self::MultinomialNb { alpha } => ModelParams::MultinomialNb(mnb::train(data, *alpha)?),
            Self::Logistic {
                ridge,
                max_iter,
                tolerance,
            } => ModelParams::Logistic(logistic::train(data, *ridge, *max_iter, *tolerance)?),
            Self::LinearSvm {
                c,
                tolerance,
                max_passes,
            } => ModelParams::LinearSvm(svm::train(data, *c, *tolerance, *max_passes)?),
            Self::Bagging { size, seed, base } => ModelParams::Bagging(bagging::train(data, *size, *seed, base)?),
            Self::DecisionTree { min_leaf } => ModelParams::DecisionTree(tree::train(data, *min_leaf)?),
        })
    }
}

/// Family-specific parameters of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelParams {
    MultinomialNb(MnbParams),
    Logistic(LogisticParams),
    LinearSvm(SvmParams),
    Bagging(BaggingParams),
    DecisionTree(TreeParams),
}

impl ModelParams {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Self::MultinomialNb(_) => "multinomial_nb",
            Self::Logistic(_) => "logistic",
            Self::LinearSvm(_) => "linear_svm",
            Self::Bagging(_) => "bagging",
            Self::DecisionTree(_) => "decision_tree",
        }
    }

    fn distribution(&self, x: &SparseVector, n_classes: usize) -> Vec<f64> {
        match self {
            Self::MultinomialNb(p) => p.distribution(x),
            Self::Logistic(p) => p.distribution(x),
            Self::LinearSvm(p) => p.distribution(x, n_classes),
            Self::Bagging(p) => p.distribution(x, n_classes),
            Self::DecisionTree(p) => p.distribution(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    pub distribution: Vec<f64>,
}

/// A trained classifier together with the label set and feature names it saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    class_labels: Vec<String>,
    feature_names: Vec<String>,
    params: ModelParams,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    #[serde(flatten)]
    model: TrainedModel,
}

impl TrainedModel {
    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        if x.dim() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.dim(),
            });
        }
        let distribution = self.params.distribution(x, self.class_labels.len());
        Ok(Prediction {
            label: argmax(&distribution),
            distribution,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc.model)
    }
}

pub fn predict(model: &TrainedModel, x: &SparseVector) -> Result<Prediction> {
    model.predict(x)
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax of log-scores, with `None` meaning probability zero.
pub(crate) fn softmax(scores: &[Option<f64>]) -> Vec<f64> {
    let max = scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| s.map_or(0.0, |v| (v - max).exp())).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

pub(crate) fn normalize(mut values: Vec<f64>) -> Vec<f64> {
    let total: f64 = values.iter().sum();
    if total > 0.0 {
        for v in &mut values {
            *v /= total;
        }
    } else {
        let n = values.len() as f64;
        values.iter_mut().for_each(|v| *v = 1.0 / n);
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn matrix(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> FeatureMatrix {
        let d = rows.first().map_or(0, Vec::len);
        FeatureMatrix::new(
            rows.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect(),
            labels.to_vec(),
            (0..n_classes).map(|c| format!("c{c}")).collect(),
            (0..d).map(|j| format!("w{j}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
    }

    #[test]
    fn spec_json_uses_defaults() {
        let spec: ClassifierSpec = serde_json::from_str(r#"{"type":"bagging"}"#).unwrap();
        assert_eq!(spec, ClassifierSpec::bagging());
        let spec: ClassifierSpec = serde_json::from_str(r#"{"type":"logistic","ridge":0.5}"#).unwrap();
        assert!(matches!(spec, ClassifierSpec::Logistic { ridge, max_iter: 200, .. } if ridge == 0.5));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0, 1], 2);
        for spec in ClassifierSpec::standard_set() {
            let model = spec.train(&data).unwrap();
            assert!(matches!(
                model.predict(&SparseVector::zeros(3)),
                Err(Error::DimensionMismatch { expected: 2, actual: 3 })
            ));
        }
    }

    #[test]
    fn empty_training_set_is_rejected() {
        let data = matrix(&[], &[], 2);
        assert!(ClassifierSpec::decision_tree().train(&data).is_err());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let data = matrix(
            &[
                vec![1.0, 0.0, 2.0],
                vec![0.0, 3.0, 1.0],
                vec![2.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            &[0, 1, 2, 1],
            3,
        );
        for spec in ClassifierSpec::standard_set() {
            let model = spec.train(&data).unwrap();
            let json = model.to_json();
            assert!(json.contains("\"format_version\": 1"));
            let back = TrainedModel::from_json(&json).unwrap();
            assert_eq!(back, model);
            for row in data.rows() {
                let a = model.predict(row).unwrap();
                let b = back.predict(row).unwrap();
                let bits = |p: &Prediction| p.distribution.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&a), bits(&b));
            }
        }
        assert!(TrainedModel::from_json("{\"format_version\": 9}").is_err());
    }

    fn random_problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
        (2usize..12, 1usize..5, 2usize..4).prop_flat_map(|(n, d, k)| {
            (
                prop::collection::vec(prop::collection::vec(prop_oneof![Just(0.0), 0.5..4.0f64], d), n),
                prop::collection::vec(0..k, n),
                Just(k),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn distributions_are_probability_vectors((rows, labels, k) in random_problem(),
                                                 probe in prop::collection::vec(0.0..5.0f64, 4)) {
            let data = matrix(&rows, &labels, k);
            let x = SparseVector::from_dense(&probe[..data.n_features()]).unwrap();
            for spec in ClassifierSpec::standard_set() {
                let model = spec.train(&data).unwrap();
                let p = model.predict(&x).unwrap();
                prop_assert_eq!(p.distribution.len(), k);
                prop_assert!(p.distribution.iter().all(|&v| v >= 0.0));
                prop_assert!((p.distribution.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                prop_assert_eq!(p.label, argmax(&p.distribution));
            }
        }

        #[test]
        fn training_is_deterministic((rows, labels, k) in random_problem()) {
            let data = matrix(&rows, &labels, k);
            for spec in ClassifierSpec::standard_set() {
                prop_assert_eq!(spec.train(&data).unwrap().to_json(), spec.train(&data).unwrap().to_json());
            }
        }

        #[test]
        fn single_attribute_two_class_encoding_is_learned(pattern in prop::collection::vec(any::<bool>(), 2..10),
                                                          noise in prop::collection::vec(0.0..3.0f64, 10)) {
            prop_assume!(pattern.iter().any(|&b| b) && pattern.iter().any(|&b| !b));
            let rows: Vec<Vec<f64>> = pattern.iter().zip(&noise)
                .map(|(&p, &z)| vec![if p { 1.0 + z } else { 0.0 }])
                .collect();
            let labels: Vec<usize> = pattern.iter().map(|&p| usize::from(p)).collect();
            let data = matrix(&rows, &labels, 2);
            for spec in [ClassifierSpec::decision_tree(), ClassifierSpec::linear_svm(), ClassifierSpec::logistic(),
                         ClassifierSpec::Bagging { size: 1, seed: 3, base: Box::new(ClassifierSpec::decision_tree()) }] {
                let model = spec.train(&data).unwrap();
                if matches!(spec, ClassifierSpec::Bagging { .. }) {
                    // a bootstrap may miss one class entirely
                    continue;
                }
                for (row, &y) in data.rows().iter().zip(&labels) {
                    prop_assert_eq!(model.predict(row).unwrap().label, y, "{}", spec.name());
                }
            }
        }
    }
}
