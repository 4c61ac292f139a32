//! Seeded generator of French-like national subcorpora in dump format.
//!
//! Every country draws from one shared Zipf-distributed pseudo-French
//! vocabulary and one shared stop-word distribution, in which "de" is often
//! followed by "la". On top of that each country gets a small set of
//! favoured content words and four capitalized place-name markers that occur
//! in about half of its documents.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evaluation::derive_seed;

pub const COUNTRIES: [&str; 6] = ["cd", "ci", "dz", "fr", "ma", "sn"];

pub const REFERENCE_NAME: &str = "frref";

const STOP_WORDS: [(&str, f64); 24] = [
    ("de", 10.0),
    ("la", 6.0),
    ("le", 5.5),
    ("et", 4.5),
    ("les", 4.0),
    ("des", 3.5),
    ("pour", 3.2),
    ("en", 3.0),
    ("un", 2.8),
    ("une", 2.6),
    ("du", 2.4),
    ("est", 2.2),
    ("que", 2.0),
    ("qui", 1.9),
    ("dans", 1.8),
    ("au", 1.6),
    ("sur", 1.5),
    ("par", 1.4),
    ("pas", 1.2),
    ("plus", 1.1),
    ("il", 1.0),
    ("elle", 0.9),
    ("nous", 0.7),
    ("avec", 0.7),
];

const ARABIC: [&str; 4] = ["في", "السوق", "الجزائر", "مرحبا"];

const ONSETS: [&str; 18] = [
    "b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "ch", "tr", "pl", "gr", "br",
];
const VOWELS: [&str; 11] = ["a", "e", "i", "o", "u", "é", "ou", "ai", "eu", "an", "on"];
const CODAS: [&str; 10] = ["", "s", "t", "r", "nt", "que", "ment", "tion", "ge", "le"];

/// Place names planted in the documents of `tld`.
pub fn markers(tld: &str) -> &'static [&'static str] {
    match tld {
        "cd" => &["Kinshasa", "Congo", "Lubumbashi", "Tshisekedi"],
        "ci" => &["Abidjan", "Ivoire", "Bouaké", "Yamoussoukro"],
        "dz" => &["Algérie", "Alger", "Oran", "Constantine"],
        "fr" => &["Paris", "Lyon", "Marseille", "Bretagne"],
        "ma" => &["Maroc", "Casablanca", "Rabat", "Marrakech"],
        "sn" => &["Sénégal", "Dakar", "Thiès", "Casamance"],
        _ => &[],
    }
}

pub fn stop_words() -> impl Iterator<Item = &'static str> {
    STOP_WORDS.iter().map(|(w, _)| *w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticOptions {
    pub docs_per_country: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub vocabulary_size: usize,
    pub favoured_words: usize,
    /// Probability that a content word comes from the country's favoured set.
    pub bias: f64,
    /// Probability that a document mentions one of the country's markers.
    pub marker_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            docs_per_country: 200,
            min_words: 250,
            max_words: 300,
            vocabulary_size: 3000,
            favoured_words: 60,
            bias: 0.04,
            marker_rate: 0.5,
            seed: 2019,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// `(tld, dump text)` per country, in [`COUNTRIES`] order.
    pub subcorpora: Vec<(String, String)>,
    /// Country-neutral reference corpus in the same format.
    pub reference: (String, String),
}

fn pseudo_words(n: usize, rng: &mut ChaCha8Rng) -> Vec<String> {
    let reserved: BTreeSet<String> = stop_words()
        .map(str::to_string)
        .chain(COUNTRIES.iter().flat_map(|c| markers(c)).map(|m| m.to_lowercase()))
        .collect();
    let mut seen = BTreeSet::new();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let syllables = rng.gen_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS.choose(rng).unwrap());
            w.push_str(VOWELS.choose(rng).unwrap());
        }
        w.push_str(CODAS.choose(rng).unwrap());
        if !reserved.contains(&w) && seen.insert(w.clone()) {
            words.push(w);
        }
    }
    words
}

struct Language {
    content: Vec<String>,
    content_dist: WeightedIndex<f64>,
    stop_dist: WeightedIndex<f64>,
}

impl Language {
    fn new(size: usize, rng: &mut ChaCha8Rng) -> Self {
        let content = pseudo_words(size, rng);
        let weights: Vec<f64> = (1..=size).map(|r| 1.0 / r as f64).collect();
        Self {
            content,
            content_dist: WeightedIndex::new(weights).unwrap(),
            stop_dist: WeightedIndex::new(STOP_WORDS.iter().map(|s| s.1)).unwrap(),
        }
    }
}

struct Country<'a> {
    favoured: Vec<&'a str>,
    markers: &'static [&'static str],
    arabic: bool,
}

fn document(lang: &Language, country: &Country, opts: &SyntheticOptions, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let target = rng.gen_range(opts.min_words..=opts.max_words);
    let mut words: Vec<String> = Vec::with_capacity(target + 1);
    while words.len() < target {
        if rng.gen_bool(0.45) {
            let (w, _) = STOP_WORDS[lang.stop_dist.sample(rng)];
            words.push(w.to_string());
            if w == "de" && words.len() < target && rng.gen_bool(0.6) {
                words.push("la".to_string());
            }
        } else if !country.favoured.is_empty() && rng.gen_bool(opts.bias) {
            words.push(country.favoured.choose(rng).unwrap().to_string());
        } else {
            words.push(lang.content[lang.content_dist.sample(rng)].clone());
        }
    }
    let mut planted: Vec<String> = Vec::new();
    if !country.markers.is_empty() && rng.gen_bool(opts.marker_rate) {
        for _ in 0..rng.gen_range(1..=2) {
            planted.push(country.markers.choose(rng).unwrap().to_string());
        }
    }
    if country.arabic && rng.gen_bool(0.3) {
        planted.push(ARABIC.choose(rng).unwrap().to_string());
    }
    // planted tokens replace words after the first of a sentence, keeping the length
    for p in planted {
        let at = rng.gen_range(1..words.len());
        words[at] = p;
    }

    let mut sentences = Vec::new();
    let mut rest = &words[..];
    while !rest.is_empty() {
        let len = rng.gen_range(8..=18).min(rest.len());
        sentences.push(rest[..len].to_vec());
        rest = &rest[len..];
    }
    sentences
}

fn render_sentence(words: &[String]) -> String {
    let mut s = String::new();
    for (i, w) in words.iter().enumerate() {
        if i == 0 {
            let mut chars = w.chars();
            if let Some(first) = chars.next() {
                s.extend(first.to_uppercase());
                s.push_str(chars.as_str());
            }
        } else {
            s.push(' ');
            s.push_str(w);
        }
    }
    s.push('.');
    s
}

fn dump(tld: &str, lang: &Language, country: &Country, opts: &SyntheticOptions, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    for d in 0..opts.docs_per_country {
        let sentences = document(lang, country, opts, rng);
        out.push_str(&format!(
            "<doc id=\"{tld}-{d:04}\" url=\"http://www.example.{tld}/{d}\">\n"
        ));
        for para in sentences.chunks(4) {
            let text: Vec<String> = para.iter().map(|s| render_sentence(s)).collect();
            out.push_str(&format!("<p>{}</p>\n", text.join(" ")));
        }
        out.push_str("</doc>\n");
    }
    out
}

pub fn generate(opts: &SyntheticOptions) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 0));
    let lang = Language::new(opts.vocabulary_size, &mut rng);

    // disjoint favoured sets from the middle of the frequency ranking
    let mut pool: Vec<&str> = lang.content.iter().skip(50).take(1500).map(String::as_str).collect();
    pool.shuffle(&mut rng);

    let subcorpora = COUNTRIES
        .iter()
        .enumerate()
        .map(|(i, tld)| {
            let favoured: Vec<&str> = pool
                .iter()
                .skip(i * opts.favoured_words)
                .take(opts.favoured_words)
                .copied()
                .collect();
            let country = Country {
                favoured,
                markers: markers(tld),
                arabic: *tld == "dz",
            };
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 1 + i as u64));
            (tld.to_string(), dump(tld, &lang, &country, opts, &mut rng))
        })
        .collect();

    let neutral = Country {
        favoured: Vec::new(),
        markers: &[],
        arabic: false,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, 100));
    let reference = (REFERENCE_NAME.to_string(), dump("fr", &lang, &neutral, opts, &mut rng));
    SyntheticCorpus { subcorpora, reference }
}
