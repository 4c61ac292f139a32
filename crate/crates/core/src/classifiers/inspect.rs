use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{argmax, ModelParams, TrainedModel, TreeNode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub depth: usize,
    pub support: usize,
    /// Split word and threshold, or `None` for a leaf.
    pub test: Option<(String, f64)>,
    /// Majority class of a leaf.
    pub class: Option<String>,
}

/// Structure of a decision tree in pre-order, with attribute indices
/// resolved to words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub node_count: usize,
    pub split_count: usize,
    pub leaf_count: usize,
    pub depth: usize,
    pub nodes: Vec<NodeSummary>,
}

pub fn inspect_tree(model: &TrainedModel) -> Result<TreeSummary> {
    let ModelParams::DecisionTree(tree) = model.params() else {
        return Err(Error::WrongModel {
            expected: "decision_tree",
            found: model.params().variant_name(),
        });
    };
    let mut nodes = Vec::with_capacity(tree.nodes.len());
    let mut stack = vec![(0usize, 0usize)];
    while let Some((id, depth)) = stack.pop() {
        match &tree.nodes[id] {
            TreeNode::Leaf { distribution, support } => nodes.push(NodeSummary {
                depth,
                support: *support,
                test: None,
                class: Some(model.class_labels()[argmax(distribution)].clone()),
            }),
            TreeNode::Split {
                attribute,
                threshold,
                left,
                right,
                support,
            } => {
                nodes.push(NodeSummary {
                    depth,
                    support: *support,
                    test: Some((model.feature_names()[*attribute].clone(), *threshold)),
                    class: None,
                });
                stack.push((*right, depth + 1));
                stack.push((*left, depth + 1));
            }
        }
    }
    let split_count = nodes.iter().filter(|n| n.test.is_some()).count();
    Ok(TreeSummary {
        node_count: nodes.len(),
        split_count,
        leaf_count: nodes.len() - split_count,
        depth: nodes.iter().map(|n| n.depth).max().unwrap_or(0),
        nodes,
    })
}

impl fmt::Display for TreeSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "nodes: {}  splits: {}  leaves: {}  depth: {}",
            self.node_count, self.split_count, self.leaf_count, self.depth
        )?;
        for n in &self.nodes {
            let pad = "|   ".repeat(n.depth);
            match (&n.test, &n.class) {
                (Some((word, t)), _) => writeln!(f, "{pad}{word} <= {t} ({})", n.support)?,
                (None, Some(class)) => writeln!(f, "{pad}=> {class} ({})", n.support)?,
                (None, None) => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordProbability {
    pub word: String,
    pub class: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnbSummary {
    /// Top words of each class, in class order.
    pub per_class: Vec<(String, Vec<WordProbability>)>,
    /// Words ranked by their largest class-conditional probability.
    pub global: Vec<WordProbability>,
}

pub fn inspect_mnb(model: &TrainedModel, top_n: usize) -> Result<MnbSummary> {
    let ModelParams::MultinomialNb(params) = model.params() else {
        return Err(Error::WrongModel {
            expected: "multinomial_nb",
            found: model.params().variant_name(),
        });
    };
    let words = model.feature_names();
    let classes = model.class_labels();
    let entry = |c: usize, w: usize| WordProbability {
        word: words[w].clone(),
        class: classes[c].clone(),
        probability: params.log_likelihoods[c][w].exp(),
    };

    let per_class = (0..classes.len())
        .map(|c| {
            let mut order: Vec<usize> = (0..words.len()).collect();
            let ll = &params.log_likelihoods[c];
            order.sort_by(|&a, &b| ll[b].total_cmp(&ll[a]).then(a.cmp(&b)));
            (
                classes[c].clone(),
                order.into_iter().take(top_n).map(|w| entry(c, w)).collect(),
            )
        })
        .collect();

    let mut best: Vec<(usize, usize)> = (0..words.len())
        .map(|w| {
            let column: Vec<f64> = params.log_likelihoods.iter().map(|ll| ll[w]).collect();
            (w, argmax(&column))
        })
        .collect();
    let ll = |(w, c): (usize, usize)| params.log_likelihoods[c][w];
    best.sort_by(|&a, &b| ll(b).total_cmp(&ll(a)).then(a.0.cmp(&b.0)));
    let global = best.into_iter().take(top_n).map(|(w, c)| entry(c, w)).collect();
    Ok(MnbSummary { per_class, global })
}

#[cfg(test)]
mod tests {
    use super::super::tests::matrix;
    use super::super::ClassifierSpec;
    use super::*;

    #[test]
    fn tree_summary_lists_words() {
        let data = matrix(
            &[vec![0.0, 1.0], vec![0.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0]],
            &[0, 1, 0, 1],
            2,
        );
        let model = ClassifierSpec::decision_tree().train(&data).unwrap();
        let s = inspect_tree(&model).unwrap();
        assert_eq!((s.node_count, s.split_count, s.leaf_count, s.depth), (3, 1, 2, 1));
        assert_eq!(s.nodes[0].test, Some(("w1".to_string(), 1.5)));
        assert_eq!(s.nodes[1].class.as_deref(), Some("c0"));
        assert_eq!(s.nodes[2].class.as_deref(), Some("c1"));
        let text = s.to_string();
        assert!(text.contains("w1 <= 1.5 (4)") && text.contains("|   => c1 (2)"));
    }

    #[test]
    fn mnb_summary_ranks_words() {
        let data = matrix(&[vec![5.0, 1.0, 0.0], vec![0.0, 1.0, 7.0]], &[0, 1], 2);
        let model = ClassifierSpec::multinomial_nb().train(&data).unwrap();
        let s = inspect_mnb(&model, 2).unwrap();
        assert_eq!(s.per_class[0].1[0].word, "w0");
        assert_eq!(s.per_class[1].1[0].word, "w2");
        assert_eq!(s.global[0].word, "w2");
        assert_eq!(s.global[0].class, "c1");
        assert!((s.global[0].probability - 8.0 / 11.0).abs() < 1e-12);
        assert_eq!(s.global.len(), 2);
    }

    #[test]
    fn wrong_model_type_is_rejected() {
        let data = matrix(&[vec![1.0], vec![0.0]], &[0, 1], 2);
        let tree = ClassifierSpec::decision_tree().train(&data).unwrap();
        let nb = ClassifierSpec::multinomial_nb().train(&data).unwrap();
        assert!(matches!(inspect_mnb(&tree, 3), Err(Error::WrongModel { .. })));
        assert!(matches!(inspect_tree(&nb), Err(Error::WrongModel { .. })));
    }
}
