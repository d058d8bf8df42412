use serde::{Deserialize, Serialize};

use super::{class_index, Classifier2d};
use crate::error::{Error, Result};

/// Improvements smaller than this do not displace an earlier candidate.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        label: usize,
    },
}

/// CART classification tree grown to purity with Gini impurity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    /// Arena of nodes; the root is at index 0.
    pub nodes: Vec<TreeNode>,
    pub classes: Vec<String>,
    pub n_features: usize,
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

/// Most frequent class; ties go to the smallest index.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Lowest weighted Gini over all midpoints between distinct sorted values.
#[allow(clippy::needless_range_loop)]
fn best_split(rows: &[Vec<f64>], labels: &[usize], samples: &[usize], k: usize) -> Option<Split> {
    let n_features = rows.first().map_or(0, Vec::len);
    let total = samples.len();
    let mut best: Option<Split> = None;
    let mut order = samples.to_vec();
    for f in 0..n_features {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]).then(a.cmp(&b)));
        let mut left = vec![0usize; k];
        let mut right = vec![0usize; k];
        for &s in &order {
            right[labels[s]] += 1;
        }
        for i in 0..total - 1 {
            let s = order[i];
            left[labels[s]] += 1;
            right[labels[s]] -= 1;
            let (a, b) = (rows[s][f], rows[order[i + 1]][f]);
            if a == b {
                continue;
            }
            let mut threshold = a + (b - a) / 2.0;
            if !threshold.is_finite() {
                continue;
            }
            if threshold >= b {
                threshold = a;
            }
            let nl = i + 1;
            let impurity = (nl as f64 * gini(&left, nl)
                + (total - nl) as f64 * gini(&right, total - nl))
                / total as f64;
            if best
                .as_ref()
                .is_none_or(|b| impurity < b.impurity - TIE_EPSILON)
            {
                best = Some(Split {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}

impl TreeModel {
    /// Grows the tree until every leaf is pure or its samples are identical.
    pub fn fit(rows: &[Vec<f64>], y: &[String]) -> Result<Self> {
        if rows.len() != y.len() {
            return Err(Error::LengthMismatch(rows.len(), y.len()));
        }
        if rows.is_empty() {
            return Err(Error::EmptyModel);
        }
        let n_features = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != n_features) {
            return Err(Error::DimensionMismatch {
                expected: n_features,
                actual: r.len(),
            });
        }
        let (classes, labels) = class_index(y);
        let k = classes.len();

        let mut nodes = vec![TreeNode::Leaf { label: 0 }];
        let mut stack = vec![(0usize, (0..rows.len()).collect::<Vec<_>>())];
        while let Some((slot, samples)) = stack.pop() {
            let mut counts = vec![0usize; k];
            for &s in &samples {
                counts[labels[s]] += 1;
            }
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let split = if pure {
                None
            } else {
                best_split(rows, &labels, &samples, k)
            };
            let Some(split) = split else {
                nodes[slot] = TreeNode::Leaf {
                    label: majority(&counts),
                };
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) = samples
                .iter()
                .partition(|&&s| rows[s][split.feature] <= split.threshold);
            let left = nodes.len();
            nodes.push(TreeNode::Leaf { label: 0 });
            nodes.push(TreeNode::Leaf { label: 0 });
            nodes[slot] = TreeNode::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right: left + 1,
            };
            stack.push((left + 1, r));
            stack.push((left, l));
        }
        Ok(TreeModel {
            nodes,
            classes,
            n_features,
        })
    }

    pub fn predict_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { label } => return Ok(label),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<&str> {
        Ok(&self.classes[self.predict_index(x)?])
    }

    /// Number of split levels on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            match self.nodes[at] {
                TreeNode::Leaf { .. } => deepest = deepest.max(d),
                TreeNode::Split { left, right, .. } => {
                    stack.push((left, d + 1));
                    stack.push((right, d + 1));
                }
            }
        }
        deepest
    }
}

impl Classifier2d for TreeModel {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn predict_2d(&self, point: [f64; 2]) -> usize {
        self.predict_index(&point).unwrap_or(0)
    }
}
