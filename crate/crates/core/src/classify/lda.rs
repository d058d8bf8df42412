use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::class_index;
use crate::error::{Error, Result};

/// Default ridge, relative to the mean diagonal of the within-class scatter.
pub const DEFAULT_RIDGE_FACTOR: f64 = 1e-6;

/// Linear discriminant projection to two dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// One `[axis1, axis2]` row per input feature.
    pub projection: Vec<[f64; 2]>,
    /// Projected class means, aligned with `classes`.
    pub class_means_2d: Vec<[f64; 2]>,
    /// Sorted class labels.
    pub classes: Vec<String>,
    /// Ridge added to the diagonal of the within-class scatter.
    pub ridge: f64,
}

/// Fits the two leading discriminant directions.
///
/// Solves `Sb w = l (Sw + eI) w` by whitening with the Cholesky factor of
/// the regularized within-class scatter, where `e = ridge_factor *
/// trace(Sw) / d` (or `ridge_factor` itself when the trace is zero). With
/// two classes the second axis is zero. Each axis is signed so that its
/// largest-magnitude coefficient is positive.
pub fn lda_fit(x: &DMatrix<f64>, y: &[String], ridge_factor: f64) -> Result<LdaModel> {
    let (n, d) = x.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch(n, y.len()));
    }
    let (classes, idx) = class_index(y);
    if classes.len() < 2 {
        return Err(Error::DegenerateLabels(classes.len()));
    }
    let k = classes.len();

    let mut counts = vec![0usize; k];
    let mut means = vec![DVector::<f64>::zeros(d); k];
    for (r, &c) in idx.iter().enumerate() {
        counts[c] += 1;
        means[c] += x.row(r).transpose();
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        *m /= c as f64;
    }
    let overall = x.row_sum().transpose() / n as f64;

    let mut sw = DMatrix::<f64>::zeros(d, d);
    for (r, &c) in idx.iter().enumerate() {
        let diff = x.row(r).transpose() - &means[c];
        sw.ger(1.0, &diff, &diff, 1.0);
    }
    let mut sb = DMatrix::<f64>::zeros(d, d);
    for (m, &c) in means.iter().zip(&counts) {
        let diff = m - &overall;
        sb.ger(c as f64, &diff, &diff, 1.0);
    }

    let trace = sw.trace();
    let ridge = if trace > 0.0 {
        ridge_factor * trace / d as f64
    } else {
        ridge_factor
    };
    for i in 0..d {
        sw[(i, i)] += ridge;
    }
    let chol = Cholesky::new(sw).ok_or(Error::SingularScatter)?;
    let l = chol.l();
    // M = L^-1 Sb L^-T
    let l_inv_sb = l.solve_lower_triangular(&sb).ok_or(Error::SingularScatter)?;
    let m = l
        .solve_lower_triangular(&l_inv_sb.transpose())
        .ok_or(Error::SingularScatter)?;
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let lt = l.transpose();
    let axes = if k == 2 { 1 } else { 2 };
    let mut projection = vec![[0.0; 2]; d];
    for (axis, &e) in order.iter().take(axes.min(d)).enumerate() {
        let v = eig.eigenvectors.column(e).into_owned();
        let mut w = lt.solve_upper_triangular(&v).ok_or(Error::SingularScatter)?;
        let peak = w.iter().copied().fold(0.0f64, |acc, c| if c.abs() > acc.abs() { c } else { acc });
        if peak < 0.0 {
            w.neg_mut();
        }
        for (row, &c) in projection.iter_mut().zip(w.iter()) {
            row[axis] = c;
        }
    }

    let mut model = LdaModel {
        projection,
        class_means_2d: Vec::new(),
        classes,
        ridge,
    };
    model.class_means_2d = means.iter().map(|m| model.project(m.as_slice())).collect();
    Ok(model)
}

impl LdaModel {
    pub fn dim(&self) -> usize {
        self.projection.len()
    }

    /// Projects one sample; the caller guarantees the dimension.
    fn project(&self, x: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (row, &v) in self.projection.iter().zip(x) {
            out[0] += row[0] * v;
            out[1] += row[1] * v;
        }
        out
    }

    pub fn transform_one(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.len(),
            });
        }
        Ok(self.project(x))
    }

    /// Projects the rows of `x`.
    pub fn transform(&self, x: &DMatrix<f64>) -> Result<Vec<[f64; 2]>> {
        if x.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: x.ncols(),
            });
        }
        Ok(x.row_iter()
            .map(|r| {
                let row: Vec<f64> = r.iter().copied().collect();
                self.project(&row)
            })
            .collect())
    }
}
