//! Test protocols and accuracy reports.
//!
//! Each protocol turns a labelled text dataset into one or more train/test
//! partitions. By default the feature pipeline is fitted on the training side
//! of every partition; [`FeatureFitting::WholeDataset`] fits it once on all
//! instances before splitting.

mod grid;

pub use grid::{render_tables, run_grid, Average, GridCell, GridOptions, GridResult, ProtocolTable};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arff::Dataset;
use crate::classifiers::{ClassifierSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSpec, FittedPipeline};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Protocol {
    TrainingSet,
    CrossValidation { folds: usize, seed: u64 },
    PercentageSplit { train_fraction: f64, seed: u64 },
}

impl Protocol {
    pub fn name(&self) -> String {
        match self {
            Self::TrainingSet => "Training set".to_string(),
            Self::CrossValidation { folds, .. } => format!("Cross-validation ({folds} folds)"),
            Self::PercentageSplit { train_fraction, .. } => {
                format!(
                    "Percentage split ({}% train)",
                    crate::arff::format_number(train_fraction * 100.0)
                )
            }
        }
    }

    /// Same protocol with its seed replaced.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            Self::TrainingSet => Self::TrainingSet,
            Self::CrossValidation { folds, .. } => Self::CrossValidation { folds, seed },
            Self::PercentageSplit { train_fraction, .. } => Self::PercentageSplit { train_fraction, seed },
        }
    }

    /// Training set, 10-fold cross-validation and a 60/40 split.
    pub fn standard_set(seed: u64) -> Vec<Protocol> {
        vec![
            Self::TrainingSet,
            Self::CrossValidation {
                folds: 10,
                seed: derive_seed(seed, 1),
            },
            Self::PercentageSplit {
                train_fraction: 0.6,
                seed: derive_seed(seed, 2),
            },
        ]
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Self::CrossValidation { folds, .. } if folds < 2 || folds > n => Err(Error::config(format!(
                "cross-validation needs 2 <= folds <= {n}, got {folds}"
            ))),
            Self::PercentageSplit { train_fraction, .. } if !(train_fraction > 0.0 && train_fraction < 1.0) => Err(
                Error::config(format!("train fraction must lie in (0, 1), got {train_fraction}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Independent seed for stream `stream` of a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureFitting {
    /// Fit the feature chain on each training partition only.
    #[default]
    PerPartition,
    /// Fit the feature chain on every instance before partitioning.
    WholeDataset,
}

/// Instances whose class has fewer than `needed` members, as warnings.
fn small_class_warnings(labels: &[usize], n_classes: usize, needed: usize, what: &str) -> Vec<String> {
    let mut counts = vec![0usize; n_classes];
    labels.iter().for_each(|&y| counts[y] += 1);
    counts
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0 && c < needed)
        .map(|(class, &c)| format!("class {class} has {c} instances, fewer than {needed} {what}; it is not stratified"))
        .collect()
}

fn shuffled_by_class(labels: &[usize], n_classes: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }
    by_class
}

/// Test-fold indices of a stratified k-fold partition.
///
/// Each class is shuffled with the seeded stream, the classes are laid end to
/// end, and position `p` goes to fold `p mod k`, so every class is spread
/// round-robin over the folds. Returns the folds and any stratification
/// warnings.
pub fn stratified_folds(
    labels: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<(Vec<Vec<usize>>, Vec<String>)> {
    Protocol::CrossValidation { folds: k, seed }.validate(labels.len())?;
    let warnings = small_class_warnings(labels, n_classes, k, "folds");
    let mut folds = vec![Vec::new(); k];
    let order: Vec<usize> = shuffled_by_class(labels, n_classes, seed).concat();
    for (p, i) in order.into_iter().enumerate() {
        folds[p % k].push(i);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok((folds, warnings))
}

/// Stratified train/test split: the first `floor(fraction * N)` instances of a
/// class-interleaved shuffle train, the rest test.
///
/// Within class `c` the `r`-th shuffled member gets key `(r + 0.5) / n_c`;
/// instances are ordered by key, then class, so each class is spread evenly.
pub fn stratified_split(
    labels: &[usize],
    n_classes: usize,
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    Protocol::PercentageSplit {
        train_fraction: fraction,
        seed,
    }
    .validate(labels.len())?;
    let n = labels.len();
    let n_train = (fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::dataset(format!(
            "a {fraction} split of {n} instances leaves one side empty"
        )));
    }
    let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    for (class, members) in shuffled_by_class(labels, n_classes, seed).into_iter().enumerate() {
        let size = members.len() as f64;
        for (r, i) in members.into_iter().enumerate() {
            keyed.push(((r as f64 + 0.5) / size, class, i));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut train: Vec<usize> = keyed[..n_train].iter().map(|k| k.2).collect();
    let mut test: Vec<usize> = keyed[n_train..].iter().map(|k| k.2).collect();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// One train/test partition with both sides already vectorized.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Dataset row of each test instance.
    pub test_rows: Vec<usize>,
}

/// All partitions of one protocol under one feature configuration.
#[derive(Debug, Clone)]
pub struct PreparedProtocol {
    pub protocol: Protocol,
    pub feature: String,
    pub fitting: FeatureFitting,
    pub folds: Vec<PreparedFold>,
    pub warnings: Vec<String>,
    pub n_instances: usize,
}

/// Train rows and test rows.
type Partition = (Vec<usize>, Vec<usize>);

fn partitions(ds: &Dataset, protocol: &Protocol) -> Result<(Vec<Partition>, Vec<String>)> {
    let labels = ds.class_values()?;
    let k = ds.class_labels()?.len();
    let n = labels.len();
    if n == 0 {
        return Err(Error::dataset("cannot evaluate on an empty dataset"));
    }
    protocol.validate(n)?;
    Ok(match *protocol {
        Protocol::TrainingSet => {
            let all: Vec<usize> = (0..n).collect();
            (vec![(all.clone(), all)], Vec::new())
        }
        Protocol::CrossValidation { folds, seed } => {
            let (folds, warnings) = stratified_folds(&labels, k, folds, seed)?;
            let parts = folds
                .into_iter()
                .map(|test| {
                    let mut in_test = vec![false; n];
                    test.iter().for_each(|&i| in_test[i] = true);
                    let train = (0..n).filter(|&i| !in_test[i]).collect();
                    (train, test)
                })
                .collect();
            (parts, warnings)
        }
        Protocol::PercentageSplit { train_fraction, seed } => {
            let warnings = small_class_warnings(&labels, k, 2, "instances");
            (vec![stratified_split(&labels, k, train_fraction, seed)?], warnings)
        }
    })
}

/// Partitions `ds` by `protocol` and vectorizes every partition.
pub fn prepare_protocol(
    ds: &Dataset,
    feature: &FeatureSpec,
    protocol: &Protocol,
    fitting: FeatureFitting,
) -> Result<PreparedProtocol> {
    let (parts, warnings) = partitions(ds, protocol)?;
    let whole = match fitting {
        FeatureFitting::WholeDataset => Some(FittedPipeline::fit(feature, ds)?.1),
        FeatureFitting::PerPartition => None,
    };
    let folds = parts
        .into_iter()
        .map(|(train_rows, test_rows)| {
            let (train, test) = match &whole {
                Some(m) => (m.subset(&train_rows), m.subset(&test_rows)),
                None => {
                    let (fitted, train) = FittedPipeline::fit(feature, &ds.subset(&train_rows))?;
                    let test = if train_rows == test_rows {
                        train.clone()
                    } else {
                        fitted.transform(&ds.subset(&test_rows))?
                    };
                    (train, test)
                }
            };
            Ok(PreparedFold { train, test, test_rows })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedProtocol {
        protocol: *protocol,
        feature: feature.name.clone(),
        fitting,
        folds,
        warnings,
        n_instances: ds.len(),
    })
}

/// Accuracy and confusion matrix of one classifier under one protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub classifier: String,
    pub feature: String,
    pub protocol: Protocol,
    pub fitting: FeatureFitting,
    pub class_labels: Vec<String>,
    /// Percentage of test instances classified correctly.
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    /// `confusion[actual][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub n_instances: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub warnings: Vec<String>,
    /// `(dataset row, predicted class)` for every test instance.
    #[serde(skip)]
    pub predictions: Vec<(usize, usize)>,
}

/// Outcome of training and testing on a single partition.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub confusion: Vec<Vec<usize>>,
    pub predictions: Vec<(usize, usize)>,
    pub n_train: usize,
}

pub fn evaluate_fold(classifier: &ClassifierSpec, fold: &PreparedFold) -> Result<FoldOutcome> {
    let model: TrainedModel = classifier.train(&fold.train)?;
    let k = fold.test.n_classes();
    let mut confusion = vec![vec![0usize; k]; k];
    let mut predictions = Vec::with_capacity(fold.test.len());
    for ((x, &y), &row) in fold.test.rows().iter().zip(fold.test.labels()).zip(&fold.test_rows) {
        let p = model.predict(x)?.label;
        confusion[y][p] += 1;
        predictions.push((row, p));
    }
    Ok(FoldOutcome {
        confusion,
        predictions,
        n_train: fold.train.len(),
    })
}

/// Pools per-fold outcomes into one report.
pub fn pool_outcomes(
    classifier: &ClassifierSpec,
    prepared: &PreparedProtocol,
    outcomes: Vec<FoldOutcome>,
) -> EvaluationReport {
    let class_labels = prepared
        .folds
        .first()
        .map(|f| f.test.class_labels().to_vec())
        .unwrap_or_default();
    let k = class_labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    let mut predictions = Vec::new();
    let mut n_train = 0;
    for o in outcomes {
        for (acc, row) in confusion.iter_mut().zip(&o.confusion) {
            for (a, c) in acc.iter_mut().zip(row) {
                *a += c;
            }
        }
        predictions.extend(o.predictions);
        n_train = n_train.max(o.n_train);
    }
    predictions.sort_unstable();
    let total: usize = confusion.iter().flatten().sum();
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    EvaluationReport {
        classifier: classifier.name().to_string(),
        feature: prepared.feature.clone(),
        protocol: prepared.protocol,
        fitting: prepared.fitting,
        class_labels,
        accuracy: if total == 0 {
            0.0
        } else {
            100.0 * correct as f64 / total as f64
        },
        correct,
        total,
        confusion,
        n_instances: prepared.n_instances,
        n_train,
        n_test: total,
        warnings: prepared.warnings.clone(),
        predictions,
    }
}

pub fn evaluate_prepared(classifier: &ClassifierSpec, prepared: &PreparedProtocol) -> Result<EvaluationReport> {
    let outcomes = prepared
        .folds
        .iter()
        .map(|f| evaluate_fold(classifier, f))
        .collect::<Result<Vec<_>>>()?;
    Ok(pool_outcomes(classifier, prepared, outcomes))
}

pub fn evaluate(
    classifier: &ClassifierSpec,
    feature: &FeatureSpec,
    ds: &Dataset,
    protocol: &Protocol,
    fitting: FeatureFitting,
) -> Result<EvaluationReport> {
    evaluate_prepared(classifier, &prepare_protocol(ds, feature, protocol, fitting)?)
}

pub fn evaluate_training_set(
    classifier: &ClassifierSpec,
    feature: &FeatureSpec,
    ds: &Dataset,
) -> Result<EvaluationReport> {
    evaluate(
        classifier,
        feature,
        ds,
        &Protocol::TrainingSet,
        FeatureFitting::PerPartition,
    )
}

pub fn evaluate_cross_validation(
    classifier: &ClassifierSpec,
    feature: &FeatureSpec,
    ds: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<EvaluationReport> {
    evaluate(
        classifier,
        feature,
        ds,
        &Protocol::CrossValidation { folds, seed },
        FeatureFitting::PerPartition,
    )
}

pub fn evaluate_percentage_split(
    classifier: &ClassifierSpec,
    feature: &FeatureSpec,
    ds: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<EvaluationReport> {
    evaluate(
        classifier,
        feature,
        ds,
        &Protocol::PercentageSplit { train_fraction, seed },
        FeatureFitting::PerPartition,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arff::{AttributeSpec, Instance, Value};
    use proptest::prelude::*;

    pub(crate) fn text_dataset(rows: &[(&str, usize)], labels: &[&str]) -> Dataset {
        Dataset::from_parts(
            "french",
            vec![
                AttributeSpec::string("text"),
                AttributeSpec::nominal("class", labels.iter().copied()),
            ],
            rows.iter()
                .map(|(t, c)| Instance::Dense(vec![Value::Str(t.to_string()), Value::Label(*c)]))
                .collect(),
        )
        .unwrap()
    }

    fn planted(n_per_class: usize) -> Dataset {
        let mut rows = Vec::new();
        for i in 0..n_per_class {
            rows.push((
                if i % 2 == 0 {
                    "dakar le marché"
                } else {
                    "dakar la plage"
                },
                0,
            ));
            rows.push((
                if i % 2 == 0 {
                    "rabat le marché"
                } else {
                    "rabat la plage"
                },
                1,
            ));
        }
        text_dataset(&rows, &["ma", "sn"])
    }

    #[test]
    fn fold_accounting() {
        let labels: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let (folds, warnings) = stratified_folds(&labels, 2, 10, 3).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.len() == 2));
        // each fold of two holds one instance of each class
        assert!(folds.iter().all(|f| labels[f[0]] != labels[f[1]]));

        let (loo, _) = stratified_folds(&[0, 1, 0, 1], 2, 4, 9).unwrap();
        assert!(loo.iter().all(|f| f.len() == 1));
        assert!(stratified_folds(&[0, 1], 2, 3, 0).is_err());
        assert!(stratified_folds(&[0, 1], 2, 1, 0).is_err());
    }

    #[test]
    fn small_classes_are_flagged() {
        let labels = [0, 0, 0, 0, 1];
        let (folds, warnings) = stratified_folds(&labels, 2, 3, 1).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 5);
    }

    #[test]
    fn split_sizes_follow_floor() {
        let labels: Vec<usize> = (0..10).map(|i| i % 3).collect();
        let (train, test) = stratified_split(&labels, 3, 0.6, 5).unwrap();
        assert_eq!((train.len(), test.len()), (6, 4));
        assert_eq!(stratified_split(&labels, 3, 0.6, 5).unwrap(), (train, test));
        assert!(stratified_split(&[0, 1], 2, 0.4, 5).is_err());
        assert!(stratified_split(&labels, 3, 1.0, 5).is_err());
    }

    #[test]
    fn resubstitution_on_a_pure_split() {
        let ds = planted(4);
        let r = evaluate_training_set(&ClassifierSpec::decision_tree(), &FeatureSpec::word_vector("w"), &ds).unwrap();
        assert_eq!(r.accuracy, 100.0);
        assert_eq!(r.confusion, [[4, 0], [0, 4]]);
    }

    #[test]
    fn single_instance_dataset() {
        let ds = text_dataset(&[("dakar", 0)], &["sn"]);
        let r = evaluate_training_set(&ClassifierSpec::multinomial_nb(), &FeatureSpec::word_vector("w"), &ds).unwrap();
        assert_eq!(r.confusion, [[1]]);
        assert!(r.accuracy == 100.0 || r.accuracy == 0.0);
        let empty = text_dataset(&[], &["sn"]);
        assert!(evaluate_training_set(
            &ClassifierSpec::multinomial_nb(),
            &FeatureSpec::word_vector("w"),
            &empty
        )
        .is_err());
    }

    #[test]
    fn cross_validation_on_planted_markers() {
        let ds = planted(10);
        for spec in ClassifierSpec::standard_set() {
            let r = evaluate_cross_validation(&spec, &FeatureSpec::word_vector("w"), &ds, 5, 7).unwrap();
            assert_eq!(r.total, 20);
            assert_eq!(r.accuracy, 100.0, "{}", spec.name());
        }
    }

    #[test]
    fn percentage_split_is_reproducible() {
        let ds = planted(10);
        let a = evaluate_percentage_split(&ClassifierSpec::logistic(), &FeatureSpec::word_vector("w"), &ds, 0.6, 4)
            .unwrap();
        let b = evaluate_percentage_split(&ClassifierSpec::logistic(), &FeatureSpec::word_vector("w"), &ds, 0.6, 4)
            .unwrap();
        assert_eq!(a, b);
        assert_eq!((a.n_train, a.n_test), (12, 8));
    }

    #[test]
    fn per_fold_vocabulary_ignores_test_text() {
        let mut rows: Vec<(String, usize)> = (0..10).map(|i| (format!("mot{} commun", i % 3), i % 2)).collect();
        let ds = text_dataset(
            &rows.iter().map(|(t, c)| (t.as_str(), *c)).collect::<Vec<_>>(),
            &["a", "b"],
        );
        let proto = Protocol::CrossValidation { folds: 5, seed: 2 };
        let before = prepare_protocol(
            &ds,
            &FeatureSpec::word_vector("w"),
            &proto,
            FeatureFitting::PerPartition,
        )
        .unwrap();
        let victim = before.folds[0].test_rows[0];
        rows[victim].0 = "zzz inconnu".to_string();
        let ds2 = text_dataset(
            &rows.iter().map(|(t, c)| (t.as_str(), *c)).collect::<Vec<_>>(),
            &["a", "b"],
        );
        let after = prepare_protocol(
            &ds2,
            &FeatureSpec::word_vector("w"),
            &proto,
            FeatureFitting::PerPartition,
        )
        .unwrap();
        assert_eq!(
            before.folds[0].train.feature_names(),
            after.folds[0].train.feature_names()
        );

        let whole = prepare_protocol(
            &ds2,
            &FeatureSpec::word_vector("w"),
            &proto,
            FeatureFitting::WholeDataset,
        )
        .unwrap();
        assert!(whole.folds[0].train.feature_names().iter().any(|w| w == "zzz"));
    }

    #[test]
    fn derived_seeds_differ_by_stream() {
        assert_ne!(derive_seed(1, 1), derive_seed(1, 2));
        assert_ne!(derive_seed(1, 1), derive_seed(2, 1));
        assert_eq!(derive_seed(5, 3), derive_seed(5, 3));
    }

    proptest! {
        #[test]
        fn folds_partition_the_dataset(labels in prop::collection::vec(0usize..3, 2..40), k in 2usize..12, seed in any::<u64>()) {
            prop_assume!(k <= labels.len());
            let (folds, _) = stratified_folds(&labels, 3, k, seed).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            prop_assert!(folds.iter().all(|f| !f.is_empty()));
        }

        #[test]
        fn split_partitions_the_dataset(labels in prop::collection::vec(0usize..3, 2..40), f in 0.05..0.95f64, seed in any::<u64>()) {
            let n = labels.len();
            let n_train = (f * n as f64).floor() as usize;
            prop_assume!(n_train > 0 && n_train < n);
            let (train, test) = stratified_split(&labels, 3, f, seed).unwrap();
            prop_assert_eq!(train.len(), n_train);
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
