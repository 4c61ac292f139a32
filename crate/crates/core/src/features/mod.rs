//! Bag-of-words featurization and attribute filtering.
//!
//! The filters compose in a fixed order: [`string_to_word_vector`] turns the
//! `text` attribute into one numeric count attribute per vocabulary word,
//! [`remove_stopwords`] deletes function words, and [`rank_attributes`] plus
//! [`select_by_threshold`] keep the attributes whose information gain about the
//! class exceeds a threshold. [`FittedPipeline`] packages the chain so it can
//! be fitted on training rows and replayed on held-out rows.

mod matrix;
mod pipeline;
mod selection;
mod stwv;

pub use matrix::{FeatureMatrix, SparseVector};
pub use pipeline::{FeatureSpec, FittedPipeline};
pub use selection::{
    entropy, info_gain, rank_attributes, ranked_words, select_by_threshold, selected_indices, RankedAttribute,
    RankedWord,
};
pub use stwv::{remove_stopwords, string_to_word_vector};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../../resources/stopwords_fr.txt");

/// Ordered list of unique words with its inverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::dataset("vocabulary words must be non-empty"));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::dataset(format!("duplicate vocabulary word {w:?}")));
            }
        }
        Ok(Self { words, index })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Vocabulary of the given positions, in the given order.
    pub fn project(&self, positions: &[usize]) -> Result<Self> {
        Self::new(positions.iter().map(|&i| self.words[i].clone()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    Binary,
    TermFrequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StwvConfig {
    pub lowercase: bool,
    pub counts: CountMode,
    pub min_doc_freq: usize,
}

impl Default for StwvConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            counts: CountMode::TermFrequency,
            min_doc_freq: 1,
        }
    }
}

impl StwvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_doc_freq == 0 {
            return Err(Error::config("min_doc_freq must be at least 1"));
        }
        Ok(())
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '’'
}

/// Splits on every character that is not a letter, digit or apostrophe.
/// Tokens made only of apostrophes are dropped.
pub fn tokenize(text: &str, lowercase: bool) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !is_word_char(c))
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(move |t| if lowercase { t.to_lowercase() } else { t.to_string() })
}

/// Set of lowercase stop words.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stoplist {
    words: BTreeSet<String>,
}

impl Stoplist {
    pub fn new<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// One word per line; `#` starts a comment line.
    pub fn from_list(list: &str) -> Self {
        Self::new(list.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    /// The bundled French list.
    pub fn french() -> Self {
        Self::from_list(BUNDLED_STOPWORDS)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_keeps_elisions() {
        let toks: Vec<_> = tokenize("L'été, à Dakar: 3 (trois)!! ' --", true).collect();
        assert_eq!(toks, ["l'été", "à", "dakar", "3", "trois"]);
        let toks: Vec<_> = tokenize("Le le LE", false).collect();
        assert_eq!(toks, ["Le", "le", "LE"]);
        let toks: Vec<_> = tokenize("في السوق", true).collect();
        assert_eq!(toks, ["في", "السوق"]);
    }

    #[test]
    fn stoplist_parsing() {
        let s = Stoplist::from_list("# header\nDe\n la \n\n");
        assert_eq!(s.iter().collect::<Vec<_>>(), ["de", "la"]);
        let fr = Stoplist::french();
        assert!(fr.contains("pour") && fr.contains("de") && fr.contains("la"));
        assert!(fr.iter().all(|w| w == w.to_lowercase() && !w.is_empty()));
    }

    #[test]
    fn vocabulary_rejects_duplicates() {
        assert!(Vocabulary::new(vec!["a".into(), "a".into()]).is_err());
        assert!(Vocabulary::new(vec!["".into()]).is_err());
        let v = Vocabulary::new(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(v.index_of("b"), Some(1));
        assert_eq!(v.project(&[1, 0]).unwrap().words(), ["b", "a"]);
    }
}
