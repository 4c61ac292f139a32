use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arff::{AttributeKind, Dataset, Value};
use crate::error::{Error, Result};

use super::{
    rank_attributes, remove_stopwords, select_by_threshold, selected_indices, string_to_word_vector, tokenize,
    CountMode, FeatureMatrix, SparseVector, Stoplist, StwvConfig,
};

/// One row of the filter grid: word vectors, optional stop-word removal and
/// optional information-gain selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(default)]
    pub stwv: StwvConfig,
    #[serde(default)]
    pub stoplist: Option<Stoplist>,
    #[serde(default)]
    pub threshold: Option<f64>,
}

impl FeatureSpec {
    pub fn word_vector(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            stwv: StwvConfig::default(),
            stoplist: None,
            threshold: None,
        }
    }

    pub fn with_stoplist(mut self, stop: Stoplist) -> Self {
        self.stoplist = Some(stop);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self
    }

    /// The six filter combinations compared in the classic STWV study.
    pub fn standard_grid() -> Vec<FeatureSpec> {
        let stop = Stoplist::french();
        vec![
            FeatureSpec::word_vector("StringToWordVector"),
            FeatureSpec::word_vector("StopWordsHandler").with_stoplist(stop.clone()),
            FeatureSpec::word_vector("AttributeSelection (0 Threshold)").with_threshold(0.0),
            FeatureSpec::word_vector("AttributeSelection (0.05 Threshold)").with_threshold(0.05),
            FeatureSpec::word_vector("AttributeSelection (0.1 Threshold)").with_threshold(0.1),
            FeatureSpec::word_vector("AttributeSelection (0 Threshold) + StopWordsHandler")
                .with_stoplist(stop)
                .with_threshold(0.0),
        ]
    }
}

/// A feature chain fitted on training rows, replayable on any text dataset
/// with the same class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    lowercase: bool,
    counts: CountMode,
    words: Vec<String>,
    index: HashMap<String, usize>,
    class_labels: Vec<String>,
}

impl FittedPipeline {
    /// Runs STWV, then stop-word removal, then threshold selection on `train`.
    pub fn fit(spec: &FeatureSpec, train: &Dataset) -> Result<(FittedPipeline, FeatureMatrix)> {
        let (mut ds, mut vocab) = string_to_word_vector(train, &spec.stwv)?;
        if let Some(stop) = &spec.stoplist {
            (ds, vocab) = remove_stopwords(&ds, &vocab, stop)?;
        }
        if let Some(threshold) = spec.threshold {
            let ranking = rank_attributes(&ds)?;
            ds = select_by_threshold(&ds, &ranking, threshold)?;
            vocab = vocab.project(&selected_indices(&ranking, threshold))?;
        }
        let words = vocab.words().to_vec();
        let matrix = FeatureMatrix::from_dataset(&ds)?.with_feature_names(words.clone())?;
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let fitted = FittedPipeline {
            lowercase: spec.stwv.lowercase,
            counts: spec.stwv.counts,
            words,
            index,
            class_labels: train.class_labels()?.to_vec(),
        };
        Ok((fitted, matrix))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Rows of `ds` in the fitted feature space; unseen words are ignored.
    pub fn transform(&self, ds: &Dataset) -> Result<FeatureMatrix> {
        if ds.class_labels()? != self.class_labels.as_slice() {
            return Err(Error::dataset("class labels differ from the fitted dataset"));
        }
        let text_attr = ds
            .attributes()
            .iter()
            .position(|a| a.kind == AttributeKind::String)
            .ok_or_else(|| Error::dataset("dataset has no string attribute"))?;
        let labels = ds.class_values()?;
        let mut rows = Vec::with_capacity(ds.len());
        for row in 0..ds.len() {
            let text = match &*ds.value(row, text_attr) {
                Value::Str(s) => s.clone(),
                _ => return Err(Error::dataset(format!("instance {row} has a missing text value"))),
            };
            rows.push(self.vectorize(&text)?);
        }
        FeatureMatrix::new(rows, labels, self.class_labels.clone(), self.words.clone())
    }

    pub fn vectorize(&self, text: &str) -> Result<SparseVector> {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for tok in tokenize(text, self.lowercase) {
            if let Some(&i) = self.index.get(&tok) {
                let c = counts.entry(i).or_default();
                *c = match self.counts {
                    CountMode::Binary => 1.0,
                    CountMode::TermFrequency => *c + 1.0,
                };
            }
        }
        let mut entries: Vec<(usize, f64)> = counts.into_iter().collect();
        entries.sort_unstable_by_key(|&(i, _)| i);
        SparseVector::new(self.words.len(), entries)
    }
}
