use serde::{Deserialize, Serialize};

use super::{class_index, Classifier2d};
use crate::error::{Error, Result};

pub const DEFAULT_LAMBDA: usize = 5;

/// Distance-weighted nearest-neighbor vote in the projected plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub points_2d: Vec<[f64; 2]>,
    /// Index into `classes` for every point.
    pub labels: Vec<usize>,
    /// Sorted class labels.
    pub classes: Vec<String>,
    pub lambda: usize,
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Index of the largest score; ties go to the smallest index.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

impl KnnModel {
    pub fn fit(points_2d: Vec<[f64; 2]>, y: &[String], lambda: usize) -> Result<Self> {
        if points_2d.len() != y.len() {
            return Err(Error::LengthMismatch(points_2d.len(), y.len()));
        }
        if points_2d.is_empty() {
            return Err(Error::EmptyModel);
        }
        let (classes, labels) = class_index(y);
        Ok(KnnModel {
            points_2d,
            labels,
            classes,
            lambda: lambda.max(1),
        })
    }

    /// Class index for `query`.
    ///
    /// The `lambda` nearest points vote with weight `1/d`. Points at distance
    /// zero decide alone by majority. Ties go to the smallest class index.
    pub fn predict_index(&self, query: [f64; 2]) -> Result<usize> {
        if self.points_2d.is_empty() {
            return Err(Error::EmptyModel);
        }
        let mut votes = vec![0.0; self.classes.len()];
        let exact: Vec<usize> = (0..self.points_2d.len())
            .filter(|&i| distance(self.points_2d[i], query) == 0.0)
            .collect();
        if !exact.is_empty() {
            for i in exact {
                votes[self.labels[i]] += 1.0;
            }
            return Ok(argmax(&votes));
        }
        let mut by_distance: Vec<(f64, usize)> = self
            .points_2d
            .iter()
            .enumerate()
            .map(|(i, &p)| (distance(p, query), i))
            .collect();
        by_distance.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(d, i) in by_distance.iter().take(self.lambda) {
            votes[self.labels[i]] += 1.0 / d;
        }
        Ok(argmax(&votes))
    }

    pub fn predict(&self, query: [f64; 2]) -> Result<&str> {
        Ok(&self.classes[self.predict_index(query)?])
    }
}

impl Classifier2d for KnnModel {
    fn classes(&self) -> &[String] {
        &self.classes
    }

    fn predict_2d(&self, point: [f64; 2]) -> usize {
        self.predict_index(point).unwrap_or(0)
    }
}
