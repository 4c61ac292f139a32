use serde::{Deserialize, Serialize};

use crate::arff::{AttributeKind, Dataset, Instance, Value};
use crate::error::{Error, Result};

/// Sparse row of a feature matrix: strictly increasing indices, no explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        let mut prev = None;
        for &(i, v) in &entries {
            if i >= dim || prev.is_some_and(|p| i <= p) {
                return Err(Error::dataset(format!(
                    "sparse index {i} is out of order or out of range"
                )));
            }
            if v == 0.0 || !v.is_finite() {
                return Err(Error::dataset(format!(
                    "sparse value {v} at index {i} must be finite and nonzero"
                )));
            }
            prev = Some(i);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        let entries = values.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect();
        Self::new(values.len(), entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map_or(0.0, |pos| self.entries[pos].1)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.entries.iter().map(|&(i, v)| (i, v * factor)).collect())
    }
}

/// Numeric design matrix with class labels, the input of every classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    rows: Vec<SparseVector>,
    labels: Vec<usize>,
    class_labels: Vec<String>,
    feature_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        rows: Vec<SparseVector>,
        labels: Vec<usize>,
        class_labels: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::dataset("row and label counts differ"));
        }
        if class_labels.is_empty() {
            return Err(Error::dataset("no class labels"));
        }
        if let Some(row) = rows.iter().find(|r| r.dim() != feature_names.len()) {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                actual: row.dim(),
            });
        }
        if labels.iter().any(|&l| l >= class_labels.len()) {
            return Err(Error::dataset("label index out of range"));
        }
        Ok(Self {
            rows,
            labels,
            class_labels,
            feature_names,
        })
    }

    /// Views a dataset whose attributes are all numeric except the final nominal class.
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        let class = ds.class_index()?;
        for attr in &ds.attributes()[..class] {
            if attr.kind != AttributeKind::Numeric {
                return Err(Error::dataset(format!("attribute {:?} is not numeric", attr.name)));
            }
        }
        let labels = ds.class_values()?;
        let mut rows = Vec::with_capacity(ds.len());
        for (r, inst) in ds.instances().iter().enumerate() {
            let mut entries = Vec::new();
            let mut push = |i: usize, v: &Value| -> Result<()> {
                if i == class {
                    return Ok(());
                }
                match v {
                    Value::Num(x) if *x != 0.0 => entries.push((i, *x)),
                    Value::Num(_) => {}
                    _ => {
                        return Err(Error::dataset(format!(
                            "instance {r} has a missing value at attribute {i}"
                        )))
                    }
                }
                Ok(())
            };
            match inst {
                Instance::Dense(values) => {
                    for (i, v) in values.iter().enumerate() {
                        push(i, v)?;
                    }
                }
                Instance::Sparse(list) => {
                    for (i, v) in list {
                        push(*i, v)?;
                    }
                }
            }
            rows.push(SparseVector::new(class, entries)?);
        }
        let names = ds.attributes()[..class].iter().map(|a| a.name.clone()).collect();
        Self::new(rows, labels, ds.class_labels()?.to_vec(), names)
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in the given order; indices may repeat.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_labels: self.class_labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub(crate) fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_names.len(),
                actual: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}
