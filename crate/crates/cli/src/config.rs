use std::fs;
use std::path::{Path, PathBuf};

use dialecto::classifiers::ClassifierSpec;
use dialecto::corpus::{Granularity, SentenceTokenizer, SizePolicy};
use dialecto::evaluation::{derive_seed, Protocol};
use dialecto::features::{FeatureSpec, Stoplist, StwvConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub tld: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceEntry {
    pub name: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureEntry {
    pub name: String,
    #[serde(default)]
    pub stwv: StwvConfig,
    /// `"french"` for the bundled list, otherwise a file with one word per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stoplist: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolEntry {
    TrainingSet,
    CrossValidation {
        #[serde(default = "default_folds")]
        folds: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    PercentageSplit {
        #[serde(default = "default_fraction")]
        train_fraction: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

fn default_folds() -> usize {
    10
}
fn default_fraction() -> f64 {
    0.6
}
fn default_seed() -> u64 {
    1
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_granularity() -> Granularity {
    Granularity::Document
}

fn default_features() -> Vec<FeatureEntry> {
    FeatureSpec::standard_grid()
        .into_iter()
        .map(|f| FeatureEntry {
            name: f.name,
            stwv: f.stwv,
            stoplist: f.stoplist.map(|_| "french".to_string()),
            threshold: f.threshold,
        })
        .collect()
}

fn default_classifiers() -> Vec<Value> {
    ["multinomial_nb", "logistic", "linear_svm", "bagging", "decision_tree"]
        .iter()
        .map(|t| serde_json::json!({ "type": t }))
        .collect()
}

fn default_protocols() -> Vec<ProtocolEntry> {
    vec![
        ProtocolEntry::TrainingSet,
        ProtocolEntry::CrossValidation {
            folds: default_folds(),
            seed: None,
        },
        ProtocolEntry::PercentageSplit {
            train_fraction: default_fraction(),
            seed: None,
        },
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default = "default_top_n")]
    pub top_n: usize,
    #[serde(default = "default_mwe_n")]
    pub mwe_n: usize,
    #[serde(default = "default_mwe_top_k")]
    pub mwe_top_k: usize,
    #[serde(default = "default_model_top_words")]
    pub model_top_words: usize,
}

fn default_top_n() -> usize {
    dialecto::analysis::DEFAULT_TOP_N
}
fn default_mwe_n() -> usize {
    2
}
fn default_mwe_top_k() -> usize {
    20
}
fn default_model_top_words() -> usize {
    20
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            top_n: default_top_n(),
            mwe_n: default_mwe_n(),
            mwe_top_k: default_mwe_top_k(),
            model_top_words: default_model_top_words(),
        }
    }
}

/// Experiment description; relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcorpora: Vec<CorpusEntry>,
    #[serde(default)]
    pub reference_corpora: Vec<ReferenceEntry>,
    #[serde(default = "default_granularity")]
    pub granularity: Granularity,
    #[serde(default)]
    pub sentence_arff: bool,
    #[serde(default)]
    pub size_policy: SizePolicy,
    #[serde(default)]
    pub trim_to_budget: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abbreviations: Option<PathBuf>,
    #[serde(default = "default_features")]
    pub features: Vec<FeatureEntry>,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<Value>,
    #[serde(default = "default_protocols")]
    pub protocols: Vec<ProtocolEntry>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub paper_mode: bool,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    /// Config with default grids over the given subcorpora.
    pub fn with_corpora(subcorpora: Vec<CorpusEntry>, reference_corpora: Vec<ReferenceEntry>) -> Self {
        Self {
            subcorpora,
            reference_corpora,
            granularity: default_granularity(),
            sentence_arff: false,
            size_policy: SizePolicy::default(),
            trim_to_budget: false,
            abbreviations: None,
            features: default_features(),
            classifiers: default_classifiers(),
            protocols: default_protocols(),
            seed: default_seed(),
            paper_mode: false,
            output_dir: default_output(),
            analysis: AnalysisConfig::default(),
        }
    }
}

pub struct Experiment {
    pub config: ExperimentConfig,
    base: PathBuf,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_file(path)?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let exp = Self { config, base };
        exp.check()?;
        Ok(exp)
    }

    fn check(&self) -> Result<(), CliError> {
        let c = &self.config;
        if c.subcorpora.is_empty() {
            return Err(CliError::Usage("config lists no subcorpora".into()));
        }
        let mut tlds: Vec<&str> = c.subcorpora.iter().map(|s| s.tld.as_str()).collect();
        tlds.sort_unstable();
        if tlds.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Usage("subcorpus labels must be unique".into()));
        }
        for (axis, empty) in [
            ("features", c.features.is_empty()),
            ("classifiers", c.classifiers.is_empty()),
            ("protocols", c.protocols.is_empty()),
        ] {
            if empty {
                return Err(CliError::Usage(format!("config axis `{axis}` is empty")));
            }
        }
        c.size_policy.validate().map_err(CliError::from)?;
        Ok(())
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.output_dir)
    }

    pub fn sentence_tokenizer(&self) -> Result<SentenceTokenizer, CliError> {
        match &self.config.abbreviations {
            Some(p) => Ok(SentenceTokenizer::from_list(&read_file(&self.resolve(p))?)),
            None => Ok(SentenceTokenizer::french()),
        }
    }

    pub fn features(&self) -> Result<Vec<FeatureSpec>, CliError> {
        self.config
            .features
            .iter()
            .map(|f| {
                let stoplist = match f.stoplist.as_deref() {
                    None => None,
                    Some("french") => Some(Stoplist::french()),
                    Some(path) => Some(Stoplist::from_list(&read_file(&self.resolve(Path::new(path)))?)),
                };
                f.stwv.validate()?;
                Ok(FeatureSpec {
                    name: f.name.clone(),
                    stwv: f.stwv,
                    stoplist,
                    threshold: f.threshold,
                })
            })
            .collect()
    }

    /// Classifier specs; a bagging entry without a seed gets one derived
    /// from the master seed and its position.
    pub fn classifiers(&self, master: u64) -> Result<Vec<ClassifierSpec>, CliError> {
        self.config
            .classifiers
            .iter()
            .enumerate()
            .map(|(i, raw)| {
                let mut raw = raw.clone();
                if let Value::Object(map) = &mut raw {
                    if map.get("type").and_then(Value::as_str) == Some("bagging") && !map.contains_key("seed") {
                        map.insert("seed".into(), Value::from(derive_seed(master, 1000 + i as u64)));
                    }
                }
                serde_json::from_value(raw).map_err(|e| CliError::Usage(format!("classifier {i}: {e}")))
            })
            .collect()
    }

    /// Protocols; a missing seed is derived from the master seed and the
    /// protocol's position.
    pub fn protocols(&self, master: u64) -> Vec<Protocol> {
        self.config
            .protocols
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let derived = derive_seed(master, 1 + i as u64);
                match *p {
                    ProtocolEntry::TrainingSet => Protocol::TrainingSet,
                    ProtocolEntry::CrossValidation { folds, seed } => Protocol::CrossValidation {
                        folds,
                        seed: seed.unwrap_or(derived),
                    },
                    ProtocolEntry::PercentageSplit { train_fraction, seed } => Protocol::PercentageSplit {
                        train_fraction,
                        seed: seed.unwrap_or(derived),
                    },
                }
            })
            .collect()
    }
}
