use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dialecto::analysis::{similarity_matrix, top_mwe_texts, CorpusProfile};
use dialecto::arff::{write_arff, Dataset};
use dialecto::classifiers::{inspect_mnb, inspect_tree, ModelParams, TrainedModel};
use dialecto::corpus::{
    build_dataset_with, trim_to_budget, validate_subcorpus, Granularity, Subcorpus, Tld, ValidationReport,
    ValidationStatus,
};
use dialecto::evaluation::{render_tables, run_grid, FeatureFitting, GridOptions};
use dialecto::features::FittedPipeline;
use dialecto::synthetic::{self, SyntheticOptions};
use serde::Serialize;

mod config;

use config::{CorpusEntry, Experiment, ExperimentConfig, ReferenceEntry};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Policy(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Policy(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Policy(m) => f.write_str(m),
        }
    }
}

impl From<dialecto::Error> for CliError {
    fn from(e: dialecto::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "dialecto",
    version,
    about = "National-variety classification of French web corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the subcorpora and write the ARFF datasets.
    Prepare {
        #[arg(long)]
        config: PathBuf,
        /// Exit with status 2 if a subcorpus is outside the word budget.
        #[arg(long)]
        strict: bool,
    },
    /// Run the feature x classifier x protocol grid.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// Fit the feature filters on the whole dataset before splitting.
        #[arg(long)]
        paper_mode: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Corpus similarity, multi-word expressions and model introspection.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// A saved decision tree or multinomial naive Bayes model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Write the seeded synthetic corpus and a matching config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2019)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        docs: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Prepare { config, strict } => prepare(&config, strict),
        Command::Evaluate {
            config,
            paper_mode,
            seed,
        } => evaluate(&config, paper_mode, seed),
        Command::Analyze { config, model } => analyze(&config, model.as_deref()),
        Command::Synth { out, seed, docs } => synth(&out, seed, docs),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("DIALECTO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("DIALECTO_THREADS must be a non-negative integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn read_dump(exp: &Experiment, path: &Path) -> Result<String, CliError> {
    let path = exp.resolve(path);
    let bytes = fs::read(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("{}: invalid UTF-8: {e}", path.display())))
}

fn load_subcorpus(exp: &Experiment, entry: &CorpusEntry) -> Result<Subcorpus, CliError> {
    let text = read_dump(exp, &entry.path)?;
    let tld = Tld::new(entry.tld.clone())?;
    let policy = &exp.config.size_policy;
    let sc = Subcorpus::from_dump(&text, tld, policy)?;
    Ok(if exp.config.trim_to_budget {
        trim_to_budget(sc, policy)
    } else {
        sc
    })
}

fn load_subcorpora(exp: &Experiment) -> Result<Vec<Subcorpus>, CliError> {
    exp.config.subcorpora.iter().map(|e| load_subcorpus(exp, e)).collect()
}

fn load_reference(exp: &Experiment, entry: &ReferenceEntry) -> Result<CorpusProfile, CliError> {
    let text = read_dump(exp, &entry.path)?;
    // the label only tags documents; the profile carries the real name
    let sc = Subcorpus::from_dump(&text, Tld::new("ref")?, &exp.config.size_policy)?;
    Ok(CorpusProfile::from_texts(entry.name.clone(), sc.texts()))
}

fn build(exp: &Experiment, subcorpora: &[Subcorpus], granularity: Granularity) -> Result<Dataset, CliError> {
    Ok(build_dataset_with(subcorpora, granularity, &exp.sentence_tokenizer()?)?)
}

fn prepare(config: &Path, strict: bool) -> Result<(), CliError> {
    let exp = Experiment::load(config)?;
    let subcorpora = load_subcorpora(&exp)?;
    let reports: Vec<ValidationReport> = subcorpora
        .iter()
        .map(|sc| validate_subcorpus(sc, &exp.config.size_policy))
        .collect();
    for r in &reports {
        let status = match r.status {
            ValidationStatus::Ok => "ok",
            ValidationStatus::Under => "under budget",
            ValidationStatus::Over => "over budget",
        };
        println!("{}: {} words, {status}", r.tld, r.total_words);
    }

    let out = exp.output_dir();
    write_atomic(&out.join("validation.json"), &to_json(&reports))?;
    let violations: Vec<String> = reports
        .iter()
        .filter(|r| r.status != ValidationStatus::Ok)
        .map(|r| r.tld.to_string())
        .collect();
    if strict && !violations.is_empty() {
        return Err(CliError::Policy(format!(
            "subcorpora outside the word budget: {}",
            violations.join(", ")
        )));
    }

    let documents = build(&exp, &subcorpora, Granularity::Document)?;
    write_atomic(&out.join("french.arff"), &write_arff(&documents))?;
    println!(
        "wrote {} ({} instances)",
        out.join("french.arff").display(),
        documents.len()
    );
    if exp.config.sentence_arff {
        let sentences = build(&exp, &subcorpora, Granularity::Sentence)?;
        let path = out.join("french_sentences.arff");
        write_atomic(&path, &write_arff(&sentences))?;
        println!("wrote {} ({} instances)", path.display(), sentences.len());
    }
    Ok(())
}

fn model_file_names(models: &[&TrainedModel]) -> Vec<String> {
    let base: Vec<String> = models.iter().map(|m| m.params().variant_name().to_string()).collect();
    base.iter()
        .enumerate()
        .map(|(i, b)| {
            if base.iter().filter(|o| *o == b).count() > 1 {
                format!("{b}-{i}.json")
            } else {
                format!("{b}.json")
            }
        })
        .collect()
}

fn evaluate(config: &Path, paper_mode: bool, seed: Option<u64>) -> Result<(), CliError> {
    let exp = Experiment::load(config)?;
    let seed = seed.unwrap_or(exp.config.seed);
    let features = exp.features()?;
    let classifiers = exp.classifiers(seed)?;
    let protocols = exp.protocols(seed);
    let subcorpora = load_subcorpora(&exp)?;
    let ds = build(&exp, &subcorpora, exp.config.granularity)?;

    let fitting = if paper_mode || exp.config.paper_mode {
        FeatureFitting::WholeDataset
    } else {
        FeatureFitting::PerPartition
    };
    let grid = run_grid(&ds, &features, &classifiers, &protocols, GridOptions { fitting, seed })?;
    let tables = render_tables(&grid);
    let out = exp.output_dir();
    let mut json = grid.to_json();
    json.push('\n');
    write_atomic(&out.join("grid.json"), &json)?;
    write_atomic(&out.join("tables.txt"), &tables)?;
    print!("{tables}");

    // models for later introspection, trained on every instance
    let best = features
        .iter()
        .position(|f| f.name == grid.by_protocol.feature)
        .unwrap_or(0);
    match FittedPipeline::fit(&features[best], &ds) {
        Ok((_, matrix)) => {
            let mut trained = Vec::new();
            for c in &classifiers {
                match c.train(&matrix) {
                    Ok(m) => trained.push(m),
                    Err(e) => eprintln!("warning: could not train {}: {e}", c.name()),
                }
            }
            let refs: Vec<&TrainedModel> = trained.iter().collect();
            for (model, name) in trained.iter().zip(model_file_names(&refs)) {
                let mut text = model.to_json();
                text.push('\n');
                write_atomic(&out.join("models").join(name), &text)?;
            }
        }
        Err(e) => eprintln!("warning: no models saved for {}: {e}", features[best].name),
    }
    Ok(())
}

#[derive(Serialize)]
struct MweList {
    corpus: String,
    entries: Vec<dialecto::analysis::MweEntry>,
}

fn analyze(config: &Path, model: Option<&Path>) -> Result<(), CliError> {
    let exp = Experiment::load(config)?;
    let subcorpora = load_subcorpora(&exp)?;
    let mut profiles: Vec<CorpusProfile> = subcorpora.iter().map(CorpusProfile::from_subcorpus).collect();
    for r in &exp.config.reference_corpora {
        profiles.push(load_reference(&exp, r)?);
    }
    let matrix = similarity_matrix(&profiles, exp.config.analysis.top_n)?;
    let out = exp.output_dir();
    write_atomic(&out.join("similarity.txt"), &matrix.to_string())?;
    write_atomic(&out.join("similarity.json"), &to_json(&matrix))?;
    print!("{matrix}");

    let tokenizer = exp.sentence_tokenizer()?;
    let a = &exp.config.analysis;
    let mut mwe = Vec::new();
    for sc in &subcorpora {
        let entries = top_mwe_texts(sc.texts(), a.mwe_n, a.mwe_top_k, &tokenizer)?;
        if let Some(first) = entries.first() {
            println!(
                "{}: top {}-gram \"{}\" ({})",
                sc.tld(),
                a.mwe_n,
                first.ngram.join(" "),
                first.count
            );
        }
        mwe.push(MweList {
            corpus: sc.tld().to_string(),
            entries,
        });
    }
    write_atomic(&out.join("mwe.json"), &to_json(&mwe))?;

    if let Some(path) = model {
        let path = exp.resolve(path);
        let text = config::read_file(&path)?;
        let model = TrainedModel::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let summary = match model.params() {
            ModelParams::DecisionTree(_) => {
                let tree = inspect_tree(&model)?;
                write_atomic(&out.join("model_summary.json"), &to_json(&tree))?;
                tree.to_string()
            }
            ModelParams::MultinomialNb(_) => {
                let mnb = inspect_mnb(&model, a.model_top_words)?;
                write_atomic(&out.join("model_summary.json"), &to_json(&mnb))?;
                render_mnb(&mnb)
            }
            other => {
                return Err(CliError::Usage(format!(
                    "cannot inspect a {} model; expected a decision tree or naive Bayes model",
                    other.variant_name()
                )))
            }
        };
        write_atomic(&out.join("model_summary.txt"), &summary)?;
        print!("{summary}");
    }
    Ok(())
}

fn render_mnb(mnb: &dialecto::classifiers::MnbSummary) -> String {
    let mut s = String::from("Top words by class-conditional probability\n");
    for w in &mnb.global {
        s.push_str(&format!("  {:<20} {:<6} {:.6}\n", w.word, w.class, w.probability));
    }
    for (class, words) in &mnb.per_class {
        s.push_str(&format!("{class}:"));
        for w in words {
            s.push_str(&format!(" {}", w.word));
        }
        s.push('\n');
    }
    s
}

fn synth(out: &Path, seed: u64, docs: usize) -> Result<(), CliError> {
    let opts = SyntheticOptions {
        docs_per_country: docs,
        seed,
        ..SyntheticOptions::default()
    };
    let corpus = synthetic::generate(&opts);
    let mut entries = Vec::new();
    for (tld, text) in &corpus.subcorpora {
        let file = format!("{tld}.xml");
        write_atomic(&out.join(&file), text)?;
        entries.push(CorpusEntry {
            tld: tld.clone(),
            path: PathBuf::from(file),
        });
    }
    let (name, text) = &corpus.reference;
    let file = format!("{name}.xml");
    write_atomic(&out.join(&file), text)?;
    let config = ExperimentConfig::with_corpora(
        entries,
        vec![ReferenceEntry {
            name: name.clone(),
            path: PathBuf::from(file),
        }],
    );
    let path = out.join("exp.json");
    write_atomic(&path, &to_json(&config))?;
    println!("wrote {}", path.display());
    Ok(())
}
