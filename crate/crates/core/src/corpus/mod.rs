//! Corpus ingestion: dump parsing, markup cleaning, size rules and dataset
//! construction at document or sentence granularity.

mod sentence;

pub use sentence::{sentence_tokenize, SentenceTokenizer};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arff::{AttributeSpec, Dataset, Instance, Value};
use crate::error::{Error, Result};

/// Relation name of every dataset built from corpora.
pub const RELATION: &str = "french";

/// Country top-level-domain label such as `fr` or `sn`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tld(String);

impl Tld {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !label.is_empty() && label.bytes().all(|b| b.is_ascii_lowercase()) {
            Ok(Self(label))
        } else {
            Err(Error::InvalidLabel(label))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Tld {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Tld::new(value)
    }
}

impl From<Tld> for String {
    fn from(t: Tld) -> String {
        t.0
    }
}

impl fmt::Display for Tld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub source_id: String,
    pub tld: Tld,
    pub body: String,
}

/// A markup-free document. Only [`clean_document`] creates these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanDocument {
    source_id: String,
    tld: Tld,
    text: String,
    word_count: usize,
}

impl CleanDocument {
    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn tld(&self) -> &Tld {
        &self.tld
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn word_count(&self) -> usize {
        self.word_count
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subcorpus {
    tld: Tld,
    documents: Vec<CleanDocument>,
    total_words: usize,
}

impl Subcorpus {
    pub fn new(tld: Tld, documents: Vec<CleanDocument>) -> Result<Self> {
        if let Some(doc) = documents.iter().find(|d| d.tld != tld) {
            return Err(Error::dataset(format!(
                "document {} is labelled {} but the subcorpus is {}",
                doc.source_id, doc.tld, tld
            )));
        }
        let total_words = documents.iter().map(|d| d.word_count).sum();
        Ok(Self {
            tld,
            documents,
            total_words,
        })
    }

    /// Parses, cleans and caps a dump in one step.
    pub fn from_dump(raw_text: &str, tld: Tld, policy: &SizePolicy) -> Result<Self> {
        let docs = parse_dump(raw_text, &tld)?.into_iter().map(clean_document).collect();
        let (kept, _dropped) = apply_doc_limit(docs, policy);
        Self::new(tld, kept)
    }

    pub fn tld(&self) -> &Tld {
        &self.tld
    }

    pub fn documents(&self) -> &[CleanDocument] {
        &self.documents
    }

    pub fn total_words(&self) -> usize {
        self.total_words
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.text.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SizePolicy {
    pub max_doc_words: usize,
    pub min_corpus_words: usize,
    pub max_corpus_words: usize,
}

impl Default for SizePolicy {
    fn default() -> Self {
        Self {
            max_doc_words: 3000,
            min_corpus_words: 50_000,
            max_corpus_words: 70_000,
        }
    }
}

impl SizePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_doc_words == 0 {
            return Err(Error::config("max_doc_words must be positive"));
        }
        if self.min_corpus_words == 0 || self.min_corpus_words > self.max_corpus_words {
            return Err(Error::config("need 0 < min_corpus_words <= max_corpus_words"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidationStatus {
    Ok,
    Under,
    Over,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tld: Tld,
    pub status: ValidationStatus,
    pub total_words: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Document,
    Sentence,
}

/// Splits a dump into its `<doc ...>...</doc>` blocks, in file order.
pub fn parse_dump(raw_text: &str, tld: &Tld) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    let mut pos = 0;
    while let Some(found) = find_doc_open(raw_text, pos) {
        let tag_end = raw_text[found..]
            .find('>')
            .map(|i| found + i)
            .ok_or(Error::UnterminatedDoc { offset: found })?;
        let attrs = &raw_text[found + 4..tag_end];
        let body_start = tag_end + 1;
        let close = raw_text[body_start..]
            .find("</doc>")
            .map(|i| body_start + i)
            .ok_or(Error::UnterminatedDoc { offset: found })?;
        let source_id = tag_attribute(attrs, "id").unwrap_or_else(|| format!("doc{}", docs.len()));
        docs.push(RawDocument {
            source_id,
            tld: tld.clone(),
            body: raw_text[body_start..close].to_string(),
        });
        pos = close + "</doc>".len();
    }
    Ok(docs)
}

/// Like [`parse_dump`], for raw bytes that may not be UTF-8.
pub fn parse_dump_bytes(raw: &[u8], tld: &Tld) -> Result<Vec<RawDocument>> {
    let text = std::str::from_utf8(raw)
        .map_err(|e| Error::dataset(format!("dump for {tld} is not UTF-8 (byte offset {})", e.valid_up_to())))?;
    parse_dump(text, tld)
}

/// Next `<doc` that is followed by whitespace or `>`.
fn find_doc_open(text: &str, from: usize) -> Option<usize> {
    let mut pos = from;
    while let Some(i) = text[pos..].find("<doc") {
        let at = pos + i;
        match text[at + 4..].chars().next() {
            Some(c) if c == '>' || c.is_whitespace() => return Some(at),
            _ => pos = at + 4,
        }
    }
    None
}

fn tag_attribute(attrs: &str, key: &str) -> Option<String> {
    let mut rest = attrs;
    while let Some(i) = rest.find(key) {
        let before_ok = rest[..i].chars().last().is_none_or(char::is_whitespace);
        let after = rest[i + key.len()..].trim_start();
        if before_ok {
            if let Some(value) = after.strip_prefix('=') {
                let value = value.trim_start();
                let quote = value.chars().next()?;
                if quote == '"' || quote == '\'' {
                    let inner = &value[1..];
                    return inner.find(quote).map(|end| inner[..end].to_string());
                }
                let end = value.find(char::is_whitespace).unwrap_or(value.len());
                return Some(value[..end].to_string());
            }
        }
        rest = &rest[i + key.len()..];
    }
    None
}

/// Strips `<doc ...>`, `</doc>`, `<p>` and `</p>` tags and normalizes whitespace.
/// Tags are replaced by a space so words in adjacent paragraphs stay apart.
pub fn clean_document(doc: RawDocument) -> CleanDocument {
    let text = strip_markup(&doc.body);
    let word_count = text.split_whitespace().count();
    CleanDocument {
        source_id: doc.source_id,
        tld: doc.tld,
        text,
        word_count,
    }
}

fn strip_markup(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut rest = body;
    while let Some(i) = rest.find('<') {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        let skip = if tail.starts_with("</doc>") {
            6
        } else if tail.starts_with("</p>") {
            4
        } else if tail.starts_with("<p>") {
            3
        } else if let Some(after) = tail.strip_prefix("<doc") {
            match after.chars().next() {
                Some(c) if c == '>' || c.is_whitespace() => after.find('>').map_or(4, |j| 4 + j + 1),
                _ => 4,
            }
        } else {
            0
        };
        if skip == 0 {
            out.push('<');
            rest = &tail[1..];
        } else {
            out.push(' ');
            rest = &tail[skip..];
        }
    }
    out.push_str(rest);
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Partitions documents into those within the per-document word cap and the rest.
/// The cap is inclusive.
pub fn apply_doc_limit(docs: Vec<CleanDocument>, policy: &SizePolicy) -> (Vec<CleanDocument>, Vec<CleanDocument>) {
    docs.into_iter().partition(|d| d.word_count <= policy.max_doc_words)
}

pub fn validate_subcorpus(sc: &Subcorpus, policy: &SizePolicy) -> ValidationReport {
    let status = if sc.total_words < policy.min_corpus_words {
        ValidationStatus::Under
    } else if sc.total_words > policy.max_corpus_words {
        ValidationStatus::Over
    } else {
        ValidationStatus::Ok
    };
    ValidationReport {
        tld: sc.tld.clone(),
        status,
        total_words: sc.total_words,
    }
}

/// Drops trailing documents until the subcorpus fits `max_corpus_words`.
pub fn trim_to_budget(sc: Subcorpus, policy: &SizePolicy) -> Subcorpus {
    let Subcorpus {
        tld,
        mut documents,
        mut total_words,
    } = sc;
    while total_words > policy.max_corpus_words {
        match documents.pop() {
            Some(d) => total_words -= d.word_count,
            None => break,
        }
    }
    Subcorpus {
        tld,
        documents,
        total_words,
    }
}

/// Builds the `french` relation with a string `text` attribute and a nominal
/// `class` attribute whose labels are the sorted TLDs.
pub fn build_dataset(subcorpora: &[Subcorpus], granularity: Granularity) -> Result<Dataset> {
    build_dataset_with(subcorpora, granularity, &SentenceTokenizer::french())
}

pub fn build_dataset_with(
    subcorpora: &[Subcorpus],
    granularity: Granularity,
    tokenizer: &SentenceTokenizer,
) -> Result<Dataset> {
    if subcorpora.len() < 2 {
        return Err(Error::dataset("at least two subcorpora are required"));
    }
    let mut labels: Vec<&str> = subcorpora.iter().map(|s| s.tld.as_str()).collect();
    labels.sort_unstable();
    if labels.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::dataset("subcorpus labels must be unique"));
    }
    if let Some(empty) = subcorpora.iter().find(|s| s.documents.is_empty()) {
        return Err(Error::EmptySubcorpus {
            tld: empty.tld.to_string(),
        });
    }

    let mut ds = Dataset::new(
        RELATION,
        vec![
            AttributeSpec::string("text"),
            AttributeSpec::nominal("class", labels.iter().copied()),
        ],
    )?;
    for sc in subcorpora {
        let label = labels.binary_search(&sc.tld.as_str()).expect("label present");
        for doc in &sc.documents {
            match granularity {
                Granularity::Document => {
                    ds.push(Instance::Dense(vec![Value::Str(doc.text.clone()), Value::Label(label)]))?;
                }
                Granularity::Sentence => {
                    for sentence in tokenizer.tokenize(&doc.text) {
                        ds.push(Instance::Dense(vec![Value::Str(sentence), Value::Label(label)]))?;
                    }
                }
            }
        }
    }
    Ok(ds)
}
