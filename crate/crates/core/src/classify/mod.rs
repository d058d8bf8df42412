//! Supervised models and their evaluation.

mod grid;
mod knn;
mod lda;
mod metrics;
mod tree;

pub use grid::{decision_grid, Bounds, Grid};
pub use knn::{KnnModel, DEFAULT_LAMBDA};
pub use lda::{lda_fit, LdaModel, DEFAULT_RIDGE_FACTOR};
pub use metrics::{balanced_accuracy_from_rates, evaluate, Metrics, EDITED};
pub use tree::{TreeModel, TreeNode};

/// A fitted model that labels points of the plane.
pub trait Classifier2d {
    fn classes(&self) -> &[String];
    /// Index into [`Classifier2d::classes`].
    fn predict_2d(&self, point: [f64; 2]) -> usize;
}

/// Sorted distinct labels and each sample's index into them.
pub fn class_index(y: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut classes: Vec<String> = y.to_vec();
    classes.sort();
    classes.dedup();
    let idx = y
        .iter()
        .map(|l| classes.binary_search(l).expect("label is in its own class list"))
        .collect();
    (classes, idx)
}
