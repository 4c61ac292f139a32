use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arff::Dataset;
use crate::classifiers::ClassifierSpec;
use crate::error::{Error, Result};
use crate::features::FeatureSpec;

use super::{
    evaluate_fold, pool_outcomes, prepare_protocol, EvaluationReport, FeatureFitting, PreparedProtocol, Protocol,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub fitting: FeatureFitting,
    /// Master seed, recorded in the result.
    pub seed: u64,
}

/// One (feature, classifier, protocol) cell; exactly one of `report` and
/// `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub feature: usize,
    pub classifier: usize,
    pub protocol: usize,
    pub report: Option<EvaluationReport>,
    pub error: Option<String>,
}

impl GridCell {
    pub fn accuracy(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.accuracy)
    }
}

/// Unweighted mean over the cells of one row, skipping failed cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Average {
    pub name: String,
    pub accuracy: Option<f64>,
    pub cells: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRow {
    pub classifier: String,
    pub accuracies: Vec<Option<f64>>,
    pub average: Option<f64>,
}

/// Per-protocol accuracies of every classifier under one feature configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTable {
    pub feature: String,
    pub rows: Vec<ProtocolRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub seed: u64,
    pub fitting: FeatureFitting,
    pub features: Vec<String>,
    pub classifiers: Vec<String>,
    pub protocols: Vec<Protocol>,
    /// Ordered by feature, then classifier, then protocol.
    pub cells: Vec<GridCell>,
    pub classifier_averages: Vec<Average>,
    pub feature_averages: Vec<Average>,
    /// Breakdown for the feature configuration with the best average.
    pub by_protocol: ProtocolTable,
}

impl GridResult {
    pub fn cell(&self, feature: usize, classifier: usize, protocol: usize) -> &GridCell {
        let n_c = self.classifiers.len();
        let n_p = self.protocols.len();
        &self.cells[(feature * n_c + classifier) * n_p + protocol]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("grid results serialize")
    }
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> (Option<f64>, usize, usize) {
    let mut sum = 0.0;
    let (mut ok, mut bad) = (0, 0);
    for v in values {
        match v {
            Some(v) => {
                sum += v;
                ok += 1;
            }
            None => bad += 1,
        }
    }
    ((ok > 0).then(|| sum / ok as f64), ok + bad, bad)
}

/// Evaluates every (feature, classifier, protocol) combination.
///
/// Partitions depend only on the protocol, so all cells of a protocol share
/// them, and each fitted partition is reused by every classifier. Cells run
/// in parallel and are merged by coordinate.
pub fn run_grid(
    ds: &Dataset,
    features: &[FeatureSpec],
    classifiers: &[ClassifierSpec],
    protocols: &[Protocol],
    options: GridOptions,
) -> Result<GridResult> {
    if features.is_empty() || classifiers.is_empty() || protocols.is_empty() {
        return Err(Error::config("every grid axis needs at least one entry"));
    }
    let mut cells = Vec::with_capacity(features.len() * classifiers.len() * protocols.len());
    for (fi, feature) in features.iter().enumerate() {
        let prepared: Vec<std::result::Result<PreparedProtocol, String>> = protocols
            .par_iter()
            .map(|p| prepare_protocol(ds, feature, p, options.fitting).map_err(|e| e.to_string()))
            .collect();

        let tasks: Vec<(usize, usize, usize)> = (0..classifiers.len())
            .flat_map(|ci| {
                let prepared = &prepared;
                (0..protocols.len()).flat_map(move |pi| {
                    let n = prepared[pi].as_ref().map_or(0, |p| p.folds.len());
                    (0..n).map(move |fold| (ci, pi, fold))
                })
            })
            .collect();
        let outcomes: Vec<_> = tasks
            .par_iter()
            .map(|&(ci, pi, fold)| {
                let p = prepared[pi].as_ref().expect("only prepared protocols have tasks");
                evaluate_fold(&classifiers[ci], &p.folds[fold])
            })
            .collect();

        let mut outcomes = outcomes.into_iter();
        for (ci, classifier) in classifiers.iter().enumerate() {
            for (pi, prep) in prepared.iter().enumerate() {
                let (report, error) = match prep {
                    Err(e) => (None, Some(e.clone())),
                    Ok(p) => {
                        let folds: Vec<_> = outcomes.by_ref().take(p.folds.len()).collect();
                        match folds.into_iter().collect::<Result<Vec<_>>>() {
                            Ok(folds) => (Some(pool_outcomes(classifier, p, folds)), None),
                            Err(e) => (None, Some(e.to_string())),
                        }
                    }
                };
                cells.push(GridCell {
                    feature: fi,
                    classifier: ci,
                    protocol: pi,
                    report,
                    error,
                });
            }
        }
    }

    let cell_at = |f: usize, c: usize, p: usize| &cells[(f * classifiers.len() + c) * protocols.len() + p];
    let classifier_averages: Vec<Average> = classifiers
        .iter()
        .enumerate()
        .map(|(ci, spec)| {
            let (accuracy, n, excluded) =
                mean((0..features.len()).flat_map(|f| (0..protocols.len()).map(move |p| cell_at(f, ci, p).accuracy())));
            Average {
                name: spec.name().to_string(),
                accuracy,
                cells: n,
                excluded,
            }
        })
        .collect();
    let feature_averages: Vec<Average> = features
        .iter()
        .enumerate()
        .map(|(fi, spec)| {
            let (accuracy, n, excluded) = mean(
                (0..classifiers.len()).flat_map(|c| (0..protocols.len()).map(move |p| cell_at(fi, c, p).accuracy())),
            );
            Average {
                name: spec.name.clone(),
                accuracy,
                cells: n,
                excluded,
            }
        })
        .collect();

    let mut best = 0;
    for (i, a) in feature_averages.iter().enumerate() {
        if a.accuracy.unwrap_or(f64::NEG_INFINITY) > feature_averages[best].accuracy.unwrap_or(f64::NEG_INFINITY) {
            best = i;
        }
    }
    let by_protocol = ProtocolTable {
        feature: features[best].name.clone(),
        rows: classifiers
            .iter()
            .enumerate()
            .map(|(ci, spec)| {
                let accuracies: Vec<Option<f64>> =
                    (0..protocols.len()).map(|p| cell_at(best, ci, p).accuracy()).collect();
                ProtocolRow {
                    classifier: spec.name().to_string(),
                    average: mean(accuracies.iter().copied()).0,
                    accuracies,
                }
            })
            .collect(),
    };

    Ok(GridResult {
        seed: options.seed,
        fitting: options.fitting,
        features: features.iter().map(|f| f.name.clone()).collect(),
        classifiers: classifiers.iter().map(|c| c.name().to_string()).collect(),
        protocols: protocols.to_vec(),
        cells,
        classifier_averages,
        feature_averages,
        by_protocol,
    })
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

fn render_table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            let pad = w - cell.chars().count();
            if i == 0 {
                s.push_str(cell);
                s.push_str(&" ".repeat(pad));
            } else {
                s.push_str("  ");
                s.push_str(&" ".repeat(pad));
                s.push_str(cell);
            }
        }
        s.trim_end().to_string()
    };
    out.push_str(title);
    out.push('\n');
    out.push_str(&line(header));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
    out.push('\n');
    for row in rows {
        out.push_str(&line(row));
        out.push('\n');
    }
    out.push('\n');
}

fn average_rows(averages: &[Average]) -> Vec<Vec<String>> {
    averages
        .iter()
        .map(|a| {
            let note = if a.excluded > 0 {
                format!("{} of {} cells excluded", a.excluded, a.cells)
            } else {
                String::new()
            };
            vec![a.name.clone(), pct(a.accuracy), note]
        })
        .collect()
}

/// Plain-text rendering of the three summary tables.
pub fn render_tables(grid: &GridResult) -> String {
    let mut out = String::new();
    out.push_str(match grid.fitting {
        FeatureFitting::PerPartition => "Feature fitting: per training partition\n",
        FeatureFitting::WholeDataset => "Feature fitting: whole dataset before partitioning (paper mode)\n",
    });
    out.push_str(&format!("Seed: {}\n\n", grid.seed));

    let avg_header = vec!["Classifier".to_string(), "Average".to_string(), String::new()];
    render_table(
        &mut out,
        "Average accuracy of classifiers (%)",
        &avg_header,
        &average_rows(&grid.classifier_averages),
    );
    let feat_header = vec!["Features".to_string(), "Average".to_string(), String::new()];
    render_table(
        &mut out,
        "Average accuracy of feature configurations (%)",
        &feat_header,
        &average_rows(&grid.feature_averages),
    );

    let mut header = vec!["Classifier".to_string()];
    header.extend(grid.protocols.iter().map(Protocol::name));
    header.push("Average".to_string());
    let rows: Vec<Vec<String>> = grid
        .by_protocol
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.classifier.clone()];
            row.extend(r.accuracies.iter().map(|&a| pct(a)));
            row.push(pct(r.average));
            row
        })
        .collect();
    render_table(
        &mut out,
        &format!("Accuracy of classifiers using {} (%)", grid.by_protocol.feature),
        &header,
        &rows,
    );

    let failures: Vec<&GridCell> = grid.cells.iter().filter(|c| c.error.is_some()).collect();
    if !failures.is_empty() {
        out.push_str("Excluded cells\n");
        for c in failures {
            out.push_str(&format!(
                "{} / {} / {}: {}\n",
                grid.features[c.feature],
                grid.classifiers[c.classifier],
                grid.protocols[c.protocol].name(),
                c.error.as_deref().unwrap_or_default()
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::text_dataset;
    use super::*;

    fn ds() -> Dataset {
        let mut rows = Vec::new();
        for i in 0..6 {
            rows.push((if i % 2 == 0 { "dakar le port" } else { "dakar la mer" }, 0));
            rows.push((if i % 2 == 0 { "rabat le port" } else { "rabat al mer" }, 1));
        }
        text_dataset(&rows, &["ma", "sn"])
    }

    #[test]
    fn singleton_grid() {
        let g = run_grid(
            &ds(),
            &[FeatureSpec::word_vector("w")],
            &[ClassifierSpec::multinomial_nb()],
            &[Protocol::TrainingSet],
            GridOptions::default(),
        )
        .unwrap();
        assert_eq!(g.cells.len(), 1);
        assert_eq!(g.classifier_averages[0].accuracy, g.cells[0].accuracy());
        assert_eq!(g.feature_averages[0].accuracy, g.cells[0].accuracy());
        let text = render_tables(&g);
        assert!(text.contains("NaiveBayesMultinomial") && text.contains("100.00"));
    }

    #[test]
    fn failed_cells_are_excluded_and_flagged() {
        let features = [
            FeatureSpec::word_vector("w"),
            // every word has gain at most 1 bit, so nothing survives
            FeatureSpec::word_vector("none").with_threshold(5.0),
        ];
        let g = run_grid(
            &ds(),
            &features,
            &[ClassifierSpec::decision_tree(), ClassifierSpec::multinomial_nb()],
            &[Protocol::TrainingSet, Protocol::CrossValidation { folds: 3, seed: 1 }],
            GridOptions::default(),
        )
        .unwrap();
        assert_eq!(g.cells.len(), 8);
        assert!(g.cell(1, 0, 0).error.is_some());
        assert_eq!(g.feature_averages[1].accuracy, None);
        assert_eq!(g.classifier_averages[0].excluded, 2);
        let ok: Vec<f64> = (0..2).filter_map(|p| g.cell(0, 0, p).accuracy()).collect();
        let expected = ok.iter().sum::<f64>() / ok.len() as f64;
        assert!((g.classifier_averages[0].accuracy.unwrap() - expected).abs() < 1e-9);
        assert_eq!(g.by_protocol.feature, "w");
        assert!(render_tables(&g).contains("Excluded cells"));
    }

    #[test]
    fn cells_sharing_a_protocol_share_partitions() {
        let g = run_grid(
            &ds(),
            &[FeatureSpec::word_vector("w")],
            &[ClassifierSpec::multinomial_nb(), ClassifierSpec::decision_tree()],
            &[Protocol::PercentageSplit {
                train_fraction: 0.5,
                seed: 3,
            }],
            GridOptions::default(),
        )
        .unwrap();
        let rows = |c: usize| -> Vec<usize> {
            g.cell(0, c, 0)
                .report
                .as_ref()
                .unwrap()
                .predictions
                .iter()
                .map(|p| p.0)
                .collect()
        };
        assert_eq!(rows(0), rows(1));
    }

    #[test]
    fn empty_axis_is_an_error() {
        assert!(run_grid(
            &ds(),
            &[],
            &[ClassifierSpec::multinomial_nb()],
            &[Protocol::TrainingSet],
            GridOptions::default()
        )
        .is_err());
    }

    #[test]
    fn mean_of_two_cells() {
        assert_eq!(mean([Some(60.0), Some(80.0)].into_iter()), (Some(70.0), 2, 0));
        assert_eq!(mean([Some(60.0), None].into_iter()), (Some(60.0), 2, 1));
    }
}
