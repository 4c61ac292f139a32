use serde::{Deserialize, Serialize};

use crate::arff::{AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

use super::stwv::project_attributes;
use super::Vocabulary;

/// Gains below this are rounding residue and are reported as exactly zero.
const GAIN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedAttribute {
    pub attribute: usize,
    pub info_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedWord {
    pub word: String,
    pub gain: f64,
}

/// Shannon entropy in bits of a count vector.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Gain of a zero/nonzero split given per-class totals and per-class nonzero counts.
pub(crate) fn binary_split_gain(class_totals: &[usize], nonzero: &[usize]) -> f64 {
    let n: usize = class_totals.iter().sum();
    if n <= 1 {
        return 0.0;
    }
    let zero: Vec<usize> = class_totals.iter().zip(nonzero).map(|(t, p)| t - p).collect();
    let n_nonzero: usize = nonzero.iter().sum();
    let n_zero = n - n_nonzero;
    let h = entropy(class_totals);
    let conditional = (n_nonzero as f64 / n as f64) * entropy(nonzero) + (n_zero as f64 / n as f64) * entropy(&zero);
    let gain = h - conditional;
    if gain < GAIN_FLOOR {
        0.0
    } else {
        gain.min(h)
    }
}

fn check_feature(ds: &Dataset, attr: usize, class: usize) -> Result<()> {
    if attr >= class {
        return Err(Error::dataset(format!("attribute {attr} is not a feature attribute")));
    }
    if ds.attributes()[attr].kind != AttributeKind::Numeric {
        return Err(Error::dataset(format!(
            "attribute {:?} is not numeric",
            ds.attributes()[attr].name
        )));
    }
    Ok(())
}

fn is_nonzero(v: &Value, row: usize) -> Result<bool> {
    match v {
        Value::Num(x) => Ok(*x != 0.0),
        _ => Err(Error::dataset(format!(
            "instance {row} has a missing or non-numeric value"
        ))),
    }
}

/// Information gain in bits of attribute `attr` about the class, with the
/// attribute binarized as zero versus nonzero.
pub fn info_gain(ds: &Dataset, attr: usize) -> Result<f64> {
    let class = ds.class_index()?;
    check_feature(ds, attr, class)?;
    let n_classes = ds.class_labels()?.len();
    let labels = ds.class_values()?;
    let mut totals = vec![0; n_classes];
    let mut nonzero = vec![0; n_classes];
    for (row, &label) in labels.iter().enumerate() {
        totals[label] += 1;
        if is_nonzero(&ds.value(row, attr), row)? {
            nonzero[label] += 1;
        }
    }
    Ok(binary_split_gain(&totals, &nonzero))
}

/// All feature attributes by decreasing gain; equal gains keep index order.
pub fn rank_attributes(ds: &Dataset) -> Result<Vec<RankedAttribute>> {
    let class = ds.class_index()?;
    for attr in 0..class {
        check_feature(ds, attr, class)?;
    }
    let n_classes = ds.class_labels()?.len();
    let labels = ds.class_values()?;
    let mut totals = vec![0; n_classes];
    let mut nonzero = vec![0usize; class * n_classes];
    for (row, (inst, &label)) in ds.instances().iter().zip(&labels).enumerate() {
        totals[label] += 1;
        let mut mark = |attr: usize, v: &Value| -> Result<()> {
            if attr != class && is_nonzero(v, row)? {
                nonzero[attr * n_classes + label] += 1;
            }
            Ok(())
        };
        match inst {
            Instance::Dense(values) => {
                for (attr, v) in values.iter().enumerate() {
                    mark(attr, v)?;
                }
            }
            Instance::Sparse(entries) => {
                for (attr, v) in entries {
                    mark(*attr, v)?;
                }
            }
        }
    }
    let mut ranking: Vec<RankedAttribute> = (0..class)
        .map(|attr| RankedAttribute {
            attribute: attr,
            info_gain: binary_split_gain(&totals, &nonzero[attr * n_classes..(attr + 1) * n_classes]),
        })
        .collect();
    ranking.sort_by(|a, b| b.info_gain.total_cmp(&a.info_gain).then(a.attribute.cmp(&b.attribute)));
    Ok(ranking)
}

/// Attribute indices with gain strictly above `threshold`, in ranking order.
pub fn selected_indices(ranking: &[RankedAttribute], threshold: f64) -> Vec<usize> {
    ranking
        .iter()
        .filter(|r| r.info_gain > threshold)
        .map(|r| r.attribute)
        .collect()
}

/// Keeps attributes whose gain is strictly greater than `threshold`, ordered
/// by rank, followed by the class attribute.
pub fn select_by_threshold(ds: &Dataset, ranking: &[RankedAttribute], threshold: f64) -> Result<Dataset> {
    let keep = selected_indices(ranking, threshold);
    if keep.is_empty() {
        return Err(Error::EmptySelection { threshold });
    }
    project_attributes(ds, &keep)
}

/// Pairs a ranking with the words of an aligned vocabulary.
pub fn ranked_words(ranking: &[RankedAttribute], vocab: &Vocabulary) -> Vec<RankedWord> {
    ranking
        .iter()
        .filter_map(|r| {
            vocab.words().get(r.attribute).map(|w| RankedWord {
                word: w.clone(),
                gain: r.info_gain,
            })
        })
        .collect()
}
