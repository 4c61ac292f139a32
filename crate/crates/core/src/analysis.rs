//! Corpus comparison and multi-word-expression counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceTokenizer, Subcorpus};
use crate::error::{Error, Result};
use crate::features::tokenize;

pub const DEFAULT_TOP_N: usize = 500;
pub const MIN_TOP_N: usize = 10;

/// Lowercased word counts of one corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusProfile {
    name: String,
    counts: BTreeMap<String, usize>,
    total: usize,
}

impl CorpusProfile {
    pub fn from_texts<'a>(name: impl Into<String>, texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for text in texts {
            for tok in tokenize(text, true) {
                *counts.entry(tok).or_default() += 1;
                total += 1;
            }
        }
        Self {
            name: name.into(),
            counts,
            total,
        }
    }

    pub fn from_subcorpus(sc: &Subcorpus) -> Self {
        Self::from_texts(sc.tld().as_str(), sc.texts())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self, word: &str) -> usize {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Frequency per million tokens.
    pub fn per_million(&self, word: &str) -> f64 {
        self.count(word) as f64 * 1e6 / self.total as f64
    }

    /// The `n` most frequent words; equal counts in lexicographic order.
    pub fn top_words(&self, n: usize) -> Vec<&str> {
        let mut words: Vec<(&str, usize)> = self.counts.iter().map(|(w, &c)| (w.as_str(), c)).collect();
        words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        words.into_iter().take(n).map(|(w, _)| w).collect()
    }
}

/// `1 + mean (fa - fb)^2 / (fa + fb)` over the union of both corpora's
/// `top_n` most frequent words, with frequencies per million tokens.
pub fn corpus_similarity(a: &CorpusProfile, b: &CorpusProfile, top_n: usize) -> Result<f64> {
    if top_n < MIN_TOP_N {
        return Err(Error::config(format!(
            "top_n must be at least {MIN_TOP_N}, got {top_n}"
        )));
    }
    for p in [a, b] {
        if p.total == 0 {
            return Err(Error::dataset(format!("corpus {:?} is empty", p.name)));
        }
    }
    let words: BTreeSet<&str> = a.top_words(top_n).into_iter().chain(b.top_words(top_n)).collect();
    let sum: f64 = words
        .iter()
        .map(|w| {
            let (fa, fb) = (a.per_million(w), b.per_million(w));
            (fa - fb) * (fa - fb) / (fa + fb)
        })
        .sum();
    Ok(1.0 + sum / words.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    pub names: Vec<String>,
    pub scores: Vec<Vec<f64>>,
}

pub fn similarity_matrix(corpora: &[CorpusProfile], top_n: usize) -> Result<SimilarityMatrix> {
    if corpora.len() < 2 {
        return Err(Error::dataset("a similarity matrix needs at least two corpora"));
    }
    let n = corpora.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| corpus_similarity(&corpora[i], &corpora[j], top_n))
        .collect::<Result<Vec<_>>>()?;
    let mut scores = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        scores[i][j] = v;
        scores[j][i] = v;
    }
    Ok(SimilarityMatrix {
        names: corpora.iter().map(|c| c.name.clone()).collect(),
        scores,
    })
}

impl fmt::Display for SimilarityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = self
            .scores
            .iter()
            .map(|row| row.iter().map(|v| format!("{v:.2}")).collect())
            .collect();
        let label_w = self.names.iter().map(|n| n.chars().count()).max().unwrap_or(0);
        let col_w = self
            .names
            .iter()
            .map(|n| n.chars().count())
            .chain(cells.iter().flatten().map(String::len))
            .max()
            .unwrap_or(0);
        write!(f, "{:label_w$}", "")?;
        for name in &self.names {
            write!(f, "  {name:>col_w$}")?;
        }
        writeln!(f)?;
        for (name, row) in self.names.iter().zip(&cells) {
            write!(f, "{name:label_w$}")?;
            for c in row {
                write!(f, "  {c:>col_w$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MweEntry {
    pub ngram: Vec<String>,
    pub count: usize,
    pub per_million: f64,
}

/// Counts contiguous lowercased word n-grams inside each sentence.
/// Returns the counts and the total number of tokens.
pub fn count_ngrams<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    n: usize,
    sentences: &SentenceTokenizer,
) -> Result<(HashMap<Vec<String>, usize>, usize)> {
    if n < 2 {
        return Err(Error::config(format!("n-grams need n >= 2, got {n}")));
    }
    let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
    let mut tokens = 0;
    for text in texts {
        for sentence in sentences.tokenize(text) {
            let words: Vec<String> = tokenize(&sentence, true).collect();
            tokens += words.len();
            for gram in words.windows(n) {
                *counts.entry(gram.to_vec()).or_default() += 1;
            }
        }
    }
    Ok((counts, tokens))
}

/// The `top_k` most frequent n-grams, by count then lexicographically.
pub fn top_mwe_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    n: usize,
    top_k: usize,
    sentences: &SentenceTokenizer,
) -> Result<Vec<MweEntry>> {
    let (counts, tokens) = count_ngrams(texts, n, sentences)?;
    let mut entries: Vec<(Vec<String>, usize)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(entries
        .into_iter()
        .take(top_k)
        .map(|(ngram, count)| MweEntry {
            ngram,
            count,
            per_million: count as f64 * 1e6 / tokens as f64,
        })
        .collect())
}

pub fn top_mwe(sc: &Subcorpus, n: usize, top_k: usize) -> Result<Vec<MweEntry>> {
    top_mwe_texts(sc.texts(), n, top_k, &SentenceTokenizer::french())
}
