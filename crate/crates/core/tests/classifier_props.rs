use dialecto::classifiers::{argmax, inspect_tree, ClassifierSpec, ModelParams};
use dialecto::features::{FeatureMatrix, SparseVector};
use proptest::prelude::*;

fn matrix(rows: &[Vec<f64>], labels: &[usize], k: usize) -> FeatureMatrix {
    FeatureMatrix::new(
        rows.iter().map(|r| SparseVector::from_dense(r).unwrap()).collect(),
        labels.to_vec(),
        (0..k).map(|c| format!("c{c}")).collect(),
        (0..rows[0].len()).map(|j| format!("w{j}")).collect(),
    )
    .unwrap()
}

/// Count rows with the same number of instances per class.
fn balanced() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
    (2usize..4, 1usize..4, 1usize..6).prop_flat_map(|(k, per_class, d)| {
        prop::collection::vec(prop::collection::vec(0u8..4, d), k * per_class).prop_map(move |rows| {
            let rows: Vec<Vec<f64>> = rows
                .into_iter()
                .map(|r| r.into_iter().map(f64::from).collect())
                .collect();
            let labels = (0..rows.len()).map(|i| i % k).collect();
            (rows, labels, k)
        })
    })
}

fn tree_data() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<usize>, usize)> {
    (2usize..4, 1usize..5, 2usize..30).prop_flat_map(|(k, d, n)| {
        (
            prop::collection::vec(prop::collection::vec(-2i8..4, d), n),
            prop::collection::vec(0..k, n),
            Just(k),
        )
            .prop_map(|(rows, labels, k)| {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(f64::from).collect())
                    .collect();
                (rows, labels, k)
            })
    })
}

proptest! {
    #[test]
    fn mnb_argmax_ignores_count_scaling(
        (rows, labels, k) in balanced(),
        query in prop::collection::vec(0u8..4, 1..6),
        factor in 2u8..6,
    ) {
        let d = rows[0].len();
        let query: Vec<f64> = (0..d).map(|j| f64::from(*query.get(j).unwrap_or(&0))).collect();
        let model = ClassifierSpec::multinomial_nb().train(&matrix(&rows, &labels, k)).unwrap();
        let base = model.predict(&SparseVector::from_dense(&query).unwrap()).unwrap();
        let mut sorted = base.distribution.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(sorted[0] - sorted[1] > 1e-9);
        let scaled: Vec<f64> = query.iter().map(|x| x * f64::from(factor)).collect();
        let p = model.predict(&SparseVector::from_dense(&scaled).unwrap()).unwrap();
        prop_assert_eq!(p.label, base.label);
        prop_assert_eq!(argmax(&p.distribution), base.label);
    }

    #[test]
    fn mnb_likelihoods_sum_to_one((rows, labels, k) in balanced(), alpha in 0.01f64..3.0) {
        let model = ClassifierSpec::MultinomialNb { alpha }.train(&matrix(&rows, &labels, k)).unwrap();
        let ModelParams::MultinomialNb(p) = model.params() else { panic!("wrong variant") };
        for ll in &p.log_likelihoods {
            let total: f64 = ll.iter().map(|l| l.exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "{}", total);
        }
    }

    #[test]
    fn tree_children_partition_parent_support((rows, labels, k) in tree_data(), min_leaf in 1usize..4) {
        let model = ClassifierSpec::DecisionTree { min_leaf }.train(&matrix(&rows, &labels, k)).unwrap();
        let summary = inspect_tree(&model).unwrap();
        prop_assert_eq!(summary.nodes[0].support, rows.len());
        prop_assert_eq!(summary.node_count, summary.split_count + summary.leaf_count);
        prop_assert_eq!(summary.leaf_count, summary.split_count + 1);
        for (i, node) in summary.nodes.iter().enumerate() {
            if node.test.is_none() {
                continue;
            }
            // pre-order: children are the following nodes one level deeper, until the depth returns
            let children: Vec<usize> = summary.nodes[i + 1..]
                .iter()
                .take_while(|n| n.depth > node.depth)
                .filter(|n| n.depth == node.depth + 1)
                .map(|n| n.support)
                .collect();
            prop_assert_eq!(children.len(), 2);
            prop_assert!(children.iter().all(|&s| s > 0 && s < node.support));
            prop_assert_eq!(children.iter().sum::<usize>(), node.support);
        }
    }
}
