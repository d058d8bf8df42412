use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive class of the manipulation-detection task.
pub const EDITED: &str = "edited";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub classes: Vec<String>,
    /// `confusion[t][p]` counts samples of class `t` predicted as `p`.
    pub confusion: Vec<Vec<usize>>,
    pub support: Vec<usize>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub per_class_f1: Vec<f64>,
    pub accuracy: f64,
    /// Mean recall over the classes present in the ground truth.
    pub balanced_accuracy: f64,
    /// Recall of the positive class, for binary tasks with a positive label.
    pub tpr: Option<f64>,
    /// Recall of the negative class, for binary tasks with a positive label.
    pub tnr: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores predictions against the truth over a fixed class list.
pub fn evaluate(
    classes: &[String],
    y_true: &[String],
    y_pred: &[String],
    positive: Option<&str>,
) -> Result<Metrics> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let k = classes.len();
    let pos = |label: &String| {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(label.clone()))
    };
    let mut confusion = vec![vec![0usize; k]; k];
    for (t, p) in y_true.iter().zip(y_pred) {
        confusion[pos(t)?][pos(p)?] += 1;
    }

    let support: Vec<usize> = confusion.iter().map(|row| row.iter().sum()).collect();
    let predicted: Vec<usize> = (0..k).map(|c| confusion.iter().map(|r| r[c]).sum()).collect();
    let tp: Vec<usize> = (0..k).map(|c| confusion[c][c]).collect();
    let precision: Vec<f64> = (0..k).map(|c| ratio(tp[c], predicted[c])).collect();
    let recall: Vec<f64> = (0..k).map(|c| ratio(tp[c], support[c])).collect();
    let per_class_f1 = (0..k)
        .map(|c| ratio(2 * tp[c], support[c] + predicted[c]))
        .collect();
    let present: Vec<usize> = (0..k).filter(|&c| support[c] > 0).collect();
    let balanced_accuracy = if present.is_empty() {
        0.0
    } else {
        present.iter().map(|&c| recall[c]).sum::<f64>() / present.len() as f64
    };

    let (tpr, tnr) = match positive.and_then(|p| classes.iter().position(|c| c == p)) {
        Some(p) if k == 2 => (Some(recall[p]), Some(recall[1 - p])),
        _ => (None, None),
    };
    Ok(Metrics {
        classes: classes.to_vec(),
        accuracy: ratio(tp.iter().sum(), y_true.len()),
        confusion,
        support,
        precision,
        recall,
        per_class_f1,
        balanced_accuracy,
        tpr,
        tnr,
    })
}

/// Balanced accuracy of a binary task from its two rates.
pub fn balanced_accuracy_from_rates(tpr: f64, tnr: f64) -> f64 {
    (tpr + tnr) / 2.0
}
