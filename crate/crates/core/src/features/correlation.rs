use nalgebra::DMatrix;

/// Pearson correlation between the columns of `x` (samples in rows).
///
/// A constant column correlates 0 with every other column and 1 with
/// itself. Results are clipped to [-1, 1] to absorb rounding.
pub fn correlation_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, d) = x.shape();
    let mut centered = x.clone();
    let constant: Vec<bool> = x
        .column_iter()
        .map(|col| n == 0 || col.iter().all(|&v| v == col[0]))
        .collect();
    for j in 0..d {
        let mean = x.column(j).sum() / n.max(1) as f64;
        centered.column_mut(j).add_scalar_mut(-mean);
    }
    let cov = centered.transpose() * &centered;
    let sd: Vec<f64> = (0..d).map(|j| cov[(j, j)].sqrt()).collect();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else if constant[i] || constant[j] || sd[i] == 0.0 || sd[j] == 0.0 {
            0.0
        } else {
            (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        }
    })
}

/// Replaces negative entries with zero.
pub fn clamp_positive(r: &DMatrix<f64>) -> DMatrix<f64> {
    r.map(|v| v.max(0.0))
}
