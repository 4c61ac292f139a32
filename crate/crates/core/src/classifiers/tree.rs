use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{entropy, FeatureMatrix, SparseVector};

/// Gains closer than this are treated as equal, so the earlier candidate stays.
const GAIN_TIE: f64 = 1e-12;

/// Node of a tree stored as a flat arena; `nodes[0]` is the root and
/// children always follow their parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        distribution: Vec<f64>,
        support: usize,
    },
    /// Instances with `x[attribute] <= threshold` go left.
    Split {
        attribute: usize,
        threshold: f64,
        left: usize,
        right: usize,
        support: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_leaf: usize,
    pub nodes: Vec<TreeNode>,
}

/// Chosen binary test at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub attribute: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Nonzero entries of the node's rows, grouped by attribute and sorted by
/// value within each group.
struct Columns {
    attrs: Vec<usize>,
    starts: Vec<usize>,
    entries: Vec<(f64, usize)>,
}

impl Columns {
    fn build(data: &FeatureMatrix, rows: &[usize]) -> Self {
        let d = data.n_features();
        let mut offsets = vec![0usize; d + 1];
        for &r in rows {
            for &(j, _) in data.rows()[r].entries() {
                offsets[j + 1] += 1;
            }
        }
        for j in 0..d {
            offsets[j + 1] += offsets[j];
        }
        let mut fill = offsets.clone();
        let mut entries = vec![(0.0, 0); offsets[d]];
        for &r in rows {
            for &(j, v) in data.rows()[r].entries() {
                entries[fill[j]] = (v, r);
                fill[j] += 1;
            }
        }
        let mut attrs = Vec::new();
        let mut starts = vec![0];
        for j in 0..d {
            let group = &mut entries[offsets[j]..offsets[j + 1]];
            if !group.is_empty() {
                group.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                attrs.push(j);
                starts.push(offsets[j + 1]);
            }
        }
        Self { attrs, starts, entries }
    }

    fn group(&self, g: usize) -> &[(f64, usize)] {
        &self.entries[self.starts[g]..self.starts[g + 1]]
    }

    /// Stable split into the rows flagged in `left` and the rest.
    fn partition(self, left: &[bool]) -> (Columns, Columns) {
        let mut out = [
            Columns {
                attrs: Vec::new(),
                starts: vec![0],
                entries: Vec::new(),
            },
            Columns {
                attrs: Vec::new(),
                starts: vec![0],
                entries: Vec::new(),
            },
        ];
        for g in 0..self.attrs.len() {
            for &e in self.group(g) {
                out[usize::from(!left[e.1])].entries.push(e);
            }
            for side in &mut out {
                if side.entries.len() > *side.starts.last().unwrap() {
                    side.attrs.push(self.attrs[g]);
                    side.starts.push(side.entries.len());
                }
            }
        }
        let [l, r] = out;
        (l, r)
    }
}

/// Highest-gain test `x[a] <= t` over `rows`, with `t` a midpoint between
/// consecutive distinct values of attribute `a`.
///
/// Candidates are scanned by attribute, then threshold, ascending; a later
/// candidate replaces the current best only if it is better by more than
/// 1e-12. Returns `None` when no attribute takes two distinct values.
pub fn best_split(data: &FeatureMatrix, rows: &[usize]) -> Option<Split> {
    let mut totals = vec![0usize; data.n_classes()];
    for &r in rows {
        totals[data.labels()[r]] += 1;
    }
    best_split_columns(data, &Columns::build(data, rows), &totals, &xlogx_table(rows.len()))
}

/// `table[c] = c * log2(c)`, with `table[0] = 0`.
fn xlogx_table(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|c| if c == 0 { 0.0 } else { c as f64 * (c as f64).log2() })
        .collect()
}

fn best_split_columns(data: &FeatureMatrix, cols: &Columns, totals: &[usize], xlogx: &[f64]) -> Option<Split> {
    let k = totals.len();
    let labels = data.labels();
    let n: usize = totals.iter().sum();
    let parent = entropy(totals);
    // n_side * H(side) = T(n_side) - sum_c T(count_c)
    let weighted = |counts: &[usize], size: usize| xlogx[size] - counts.iter().map(|&c| xlogx[c]).sum::<f64>();

    let mut best: Option<Split> = None;
    let mut left = vec![0usize; k];
    let mut right = vec![0usize; k];
    let mut zero_counts = vec![0usize; k];
    // distinct values of the current attribute and their flat k-wide class counts
    let mut values: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for g in 0..cols.attrs.len() {
        let attr = cols.attrs[g];
        let nonzero = cols.group(g);
        zero_counts.copy_from_slice(totals);
        for &(_, r) in nonzero {
            zero_counts[labels[r]] -= 1;
        }
        let zeros = n - nonzero.len();
        values.clear();
        counts.clear();
        let mut zero_placed = zeros == 0;
        for &(v, r) in nonzero {
            if !zero_placed && v > 0.0 {
                values.push(0.0);
                counts.extend_from_slice(&zero_counts);
                zero_placed = true;
            }
            if values.last() != Some(&v) {
                values.push(v);
                counts.resize(counts.len() + k, 0);
            }
            let base = counts.len() - k;
            counts[base + labels[r]] += 1;
        }
        if !zero_placed {
            values.push(0.0);
            counts.extend_from_slice(&zero_counts);
        }

        left.iter_mut().for_each(|c| *c = 0);
        let mut n_left = 0;
        for i in 0..values.len().saturating_sub(1) {
            let (lo, hi) = (values[i], values[i + 1]);
            for (l, c) in left.iter_mut().zip(&counts[i * k..(i + 1) * k]) {
                *l += c;
                n_left += c;
            }
            for ((r, t), l) in right.iter_mut().zip(totals).zip(&left) {
                *r = t - l;
            }
            let n_right = n - n_left;
            let gain = parent - (weighted(&left, n_left) + weighted(&right, n_right)) / n as f64;
            if best.is_none_or(|b| gain > b.gain + GAIN_TIE) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some(Split {
                    attribute: attr,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

pub(super) fn train(data: &FeatureMatrix, min_leaf: usize) -> Result<TreeParams> {
    if min_leaf == 0 {
        return Err(Error::config("min_leaf must be at least 1"));
    }
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..data.len()).collect();
    let cols = Columns::build(data, &rows);
    let mut mask = vec![false; data.len()];
    let xlogx = xlogx_table(data.len());
    grow(data, rows, cols, min_leaf, &xlogx, &mut mask, &mut nodes);
    Ok(TreeParams { min_leaf, nodes })
}

fn grow(
    data: &FeatureMatrix,
    rows: Vec<usize>,
    cols: Columns,
    min_leaf: usize,
    xlogx: &[f64],
    mask: &mut [bool],
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let k = data.n_classes();
    let mut counts = vec![0usize; k];
    for &r in &rows {
        counts[data.labels()[r]] += 1;
    }
    let support = rows.len();
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let split = if pure || support < min_leaf {
        None
    } else {
        best_split_columns(data, &cols, &counts, xlogx).filter(|s| s.gain > GAIN_TIE)
    };
    let id = nodes.len();
    let Some(split) = split else {
        let distribution = counts.iter().map(|&c| c as f64 / support.max(1) as f64).collect();
        nodes.push(TreeNode::Leaf { distribution, support });
        return id;
    };
    nodes.push(TreeNode::Leaf {
        distribution: Vec::new(),
        support,
    });
    let (l, r): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&row| data.rows()[row].get(split.attribute) <= split.threshold);
    for &row in &l {
        mask[row] = true;
    }
    let (lc, rc) = cols.partition(mask);
    for &row in &l {
        mask[row] = false;
    }
    let left = grow(data, l, lc, min_leaf, xlogx, mask, nodes);
    let right = grow(data, r, rc, min_leaf, xlogx, mask, nodes);
    nodes[id] = TreeNode::Split {
        attribute: split.attribute,
        threshold: split.threshold,
        left,
        right,
        support,
    };
    id
}

impl TreeParams {
    pub fn leaf_for(&self, x: &SparseVector) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Leaf { .. } => return id,
                TreeNode::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if x.get(*attribute) <= *threshold { *left } else { *right },
            }
        }
    }

    pub(super) fn distribution(&self, x: &SparseVector) -> Vec<f64> {
        match &self.nodes[self.leaf_for(x)] {
            TreeNode::Leaf { distribution, .. } => distribution.clone(),
            TreeNode::Split { .. } => unreachable!(),
        }
    }
}
