use std::collections::{BTreeMap, HashMap};

use crate::arff::{AttributeKind, AttributeSpec, Dataset, Instance, Value};
use crate::error::{Error, Result};

use super::{tokenize, CountMode, Stoplist, StwvConfig, Vocabulary};

/// Replaces the string attribute with one numeric attribute per word.
///
/// Words are sorted lexicographically and the class attribute moves to the
/// end. Output instances are sparse. A word that equals the class attribute's
/// name gets a leading underscore in its attribute name; underscores never
/// occur inside tokens, so the renamed attribute cannot collide.
pub fn string_to_word_vector(ds: &Dataset, cfg: &StwvConfig) -> Result<(Dataset, Vocabulary)> {
    cfg.validate()?;
    let class = ds.class_index()?;
    let text_attr = single_string_attribute(ds, class)?;
    let labels = ds.class_values()?;

    let mut doc_counts: Vec<HashMap<String, usize>> = Vec::with_capacity(ds.len());
    let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
    for row in 0..ds.len() {
        let text = match &*ds.value(row, text_attr) {
            Value::Str(s) => s.clone(),
            _ => return Err(Error::dataset(format!("instance {row} has a missing text value"))),
        };
        let mut counts: HashMap<String, usize> = HashMap::new();
        for tok in tokenize(&text, cfg.lowercase) {
            *counts.entry(tok).or_default() += 1;
        }
        for word in counts.keys() {
            *doc_freq.entry(word.clone()).or_default() += 1;
        }
        doc_counts.push(counts);
    }

    let words: Vec<String> = doc_freq
        .into_iter()
        .filter(|&(_, df)| df >= cfg.min_doc_freq)
        .map(|(w, _)| w)
        .collect();
    let vocab = Vocabulary::new(words)?;

    let class_spec = ds.attributes()[class].clone();
    let mut attributes: Vec<AttributeSpec> = vocab
        .words()
        .iter()
        .map(|w| {
            if *w == class_spec.name {
                AttributeSpec::numeric(format!("_{w}"))
            } else {
                AttributeSpec::numeric(w.clone())
            }
        })
        .collect();
    let class_pos = attributes.len();
    attributes.push(class_spec);

    let mut instances = Vec::with_capacity(ds.len());
    for (counts, label) in doc_counts.into_iter().zip(labels) {
        let mut entries: Vec<(usize, Value)> = counts
            .into_iter()
            .filter_map(|(w, c)| {
                vocab.index_of(&w).map(|i| {
                    let v = match cfg.counts {
                        CountMode::Binary => 1.0,
                        CountMode::TermFrequency => c as f64,
                    };
                    (i, Value::Num(v))
                })
            })
            .collect();
        entries.sort_unstable_by_key(|(i, _)| *i);
        entries.push((class_pos, Value::Label(label)));
        instances.push(Instance::Sparse(entries));
    }
    let out = Dataset::from_parts(ds.relation(), attributes, instances)?;
    Ok((out, vocab))
}

fn single_string_attribute(ds: &Dataset, class: usize) -> Result<usize> {
    let mut found = None;
    for (i, attr) in ds.attributes().iter().enumerate() {
        if i == class {
            continue;
        }
        match attr.kind {
            AttributeKind::String if found.is_none() => found = Some(i),
            _ => {
                return Err(Error::dataset(
                    "expected exactly one string attribute and a nominal class attribute",
                ))
            }
        }
    }
    found.ok_or_else(|| Error::dataset("dataset has no string attribute"))
}

/// Deletes every word attribute whose word is in `stop`, keeping order.
pub fn remove_stopwords(ds: &Dataset, vocab: &Vocabulary, stop: &Stoplist) -> Result<(Dataset, Vocabulary)> {
    check_alignment(ds, vocab)?;
    let keep: Vec<usize> = vocab
        .words()
        .iter()
        .enumerate()
        .filter(|(_, w)| !stop.contains(w))
        .map(|(i, _)| i)
        .collect();
    Ok((project_attributes(ds, &keep)?, vocab.project(&keep)?))
}

pub(super) fn check_alignment(ds: &Dataset, vocab: &Vocabulary) -> Result<()> {
    let class = ds.class_index()?;
    if class != vocab.len() {
        return Err(Error::DimensionMismatch {
            expected: vocab.len(),
            actual: class,
        });
    }
    Ok(())
}

/// Keeps the listed non-class attributes in the listed order, then the class.
pub(super) fn project_attributes(ds: &Dataset, keep: &[usize]) -> Result<Dataset> {
    let class = ds.class_index()?;
    let mut new_pos: Vec<Option<usize>> = vec![None; ds.attributes().len()];
    for (new, &old) in keep.iter().enumerate() {
        if old >= class {
            return Err(Error::dataset(format!("attribute {old} is not a feature attribute")));
        }
        new_pos[old] = Some(new);
    }
    new_pos[class] = Some(keep.len());

    let mut attributes: Vec<AttributeSpec> = keep.iter().map(|&i| ds.attributes()[i].clone()).collect();
    attributes.push(ds.attributes()[class].clone());

    let instances = ds
        .instances()
        .iter()
        .map(|inst| match inst {
            Instance::Dense(values) => {
                let mut out: Vec<Value> = keep.iter().map(|&i| values[i].clone()).collect();
                out.push(values[class].clone());
                Instance::Dense(out)
            }
            Instance::Sparse(entries) => {
                let mut out: Vec<(usize, Value)> = entries
                    .iter()
                    .filter_map(|(i, v)| new_pos[*i].map(|n| (n, v.clone())))
                    .collect();
                out.sort_unstable_by_key(|(i, _)| *i);
                Instance::Sparse(out)
            }
        })
        .collect();
    Dataset::from_parts(ds.relation(), attributes, instances)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureMatrix;
    use proptest::prelude::*;

    fn text_dataset(rows: &[(&str, usize)]) -> Dataset {
        Dataset::from_parts(
            "french",
            vec![
                AttributeSpec::string("text"),
                AttributeSpec::nominal("class", ["X", "Y"]),
            ],
            rows.iter()
                .map(|(t, c)| Instance::Dense(vec![Value::Str(t.to_string()), Value::Label(*c)]))
                .collect(),
        )
        .unwrap()
    }

    fn dense_rows(ds: &Dataset) -> Vec<Vec<f64>> {
        FeatureMatrix::from_dataset(ds)
            .unwrap()
            .rows()
            .iter()
            .map(|r| r.to_dense())
            .collect()
    }

    #[test]
    fn counts_words_per_instance() {
        let ds = text_dataset(&[("a b a", 0), ("b c", 1)]);
        let (out, vocab) = string_to_word_vector(&ds, &StwvConfig::default()).unwrap();
        assert_eq!(vocab.words(), ["a", "b", "c"]);
        assert_eq!(dense_rows(&out), vec![vec![2.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]);
        assert_eq!(out.class_values().unwrap(), [0, 1]);
        assert_eq!(out.attributes().last().unwrap().name, "class");
    }

    #[test]
    fn empty_text_and_case_folding() {
        let ds = text_dataset(&[("", 1), ("Le le LE", 0)]);
        let (out, vocab) = string_to_word_vector(&ds, &StwvConfig::default()).unwrap();
        assert_eq!(vocab.words(), ["le"]);
        assert_eq!(dense_rows(&out), vec![vec![0.0], vec![3.0]]);
        assert_eq!(out.class_values().unwrap(), [1, 0]);
    }

    #[test]
    fn binary_counts_and_min_doc_freq() {
        let ds = text_dataset(&[("a a b", 0), ("a c", 1)]);
        let cfg = StwvConfig {
            counts: CountMode::Binary,
            min_doc_freq: 2,
            ..StwvConfig::default()
        };
        let (out, vocab) = string_to_word_vector(&ds, &cfg).unwrap();
        assert_eq!(vocab.words(), ["a"]);
        assert_eq!(dense_rows(&out), vec![vec![1.0], vec![1.0]]);
        assert!(string_to_word_vector(&ds, &StwvConfig { min_doc_freq: 0, ..cfg }).is_err());
    }

    #[test]
    fn class_name_collision_is_renamed() {
        let ds = text_dataset(&[("class act", 0)]);
        let (out, vocab) = string_to_word_vector(&ds, &StwvConfig::default()).unwrap();
        assert_eq!(vocab.words(), ["act", "class"]);
        assert_eq!(out.attributes()[1].name, "_class");
    }

    #[test]
    fn missing_text_is_an_error() {
        let ds = Dataset::from_parts(
            "r",
            vec![AttributeSpec::string("text"), AttributeSpec::nominal("class", ["X"])],
            vec![Instance::Dense(vec![Value::Missing, Value::Label(0)])],
        )
        .unwrap();
        assert!(string_to_word_vector(&ds, &StwvConfig::default()).is_err());
    }

    #[test]
    fn stopword_removal() {
        let ds = text_dataset(&[("de la ville", 0), ("la ville de pour", 1)]);
        let (wv, vocab) = string_to_word_vector(&ds, &StwvConfig::default()).unwrap();
        assert_eq!(vocab.words(), ["de", "la", "pour", "ville"]);
        let (out, v2) = remove_stopwords(&wv, &vocab, &Stoplist::new(["de", "la"])).unwrap();
        assert_eq!(v2.words(), ["pour", "ville"]);
        assert_eq!(dense_rows(&out), vec![vec![0.0, 1.0], vec![1.0, 1.0]]);

        let (same, v3) = remove_stopwords(&wv, &vocab, &Stoplist::default()).unwrap();
        assert_eq!(same, wv);
        assert_eq!(v3, vocab);

        let (_, v4) = remove_stopwords(&wv, &vocab, &Stoplist::french()).unwrap();
        assert_eq!(v4.words(), ["ville"]);
        assert!(v4.index_of("pour").is_none());
    }

    #[test]
    fn misaligned_vocabulary_is_rejected() {
        let ds = text_dataset(&[("a b", 0)]);
        let (wv, _) = string_to_word_vector(&ds, &StwvConfig::default()).unwrap();
        let wrong = Vocabulary::new(vec!["a".into()]).unwrap();
        assert!(remove_stopwords(&wv, &wrong, &Stoplist::default()).is_err());
    }

    proptest! {
        #[test]
        fn label_preserving_and_commutes_with_stopwords(
            docs in prop::collection::vec(("[a-f ]{0,20}", 0usize..2), 1..8),
        ) {
            let rows: Vec<(&str, usize)> = docs.iter().map(|(t, c)| (t.as_str(), *c)).collect();
            let ds = text_dataset(&rows);
            let (wv, vocab) = string_to_word_vector(&ds, &StwvConfig::default()).unwrap();
            prop_assert_eq!(wv.class_values().unwrap(), ds.class_values().unwrap());

            // stop words absent from the text leave the transform unchanged
            let stop = Stoplist::new(["zz", "qq"]);
            let (filtered, v2) = remove_stopwords(&wv, &vocab, &stop).unwrap();
            prop_assert_eq!(filtered, wv);
            prop_assert_eq!(v2, vocab);
        }
    }
}
