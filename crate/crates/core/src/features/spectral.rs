use nalgebra::{DMatrix, SymmetricEigen};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITER: usize = 300;

/// Spectral clustering of the features described by an affinity matrix.
///
/// Uses the symmetric normalized Laplacian `I - D^-1/2 A D^-1/2`, embeds each
/// feature with the eigenvectors of the `alpha` smallest eigenvalues,
/// normalizes the rows and runs seeded k-means++ on the embedding.
///
/// Features with zero total affinity become singleton clusters and the rest
/// share the remaining cluster budget. Labels are 0-based and numbered by
/// first appearance.
pub fn spectral_cluster(affinity: &DMatrix<f64>, alpha: usize, seed: u64) -> Result<Vec<usize>> {
    let n = affinity.nrows();
    if alpha == 0 || alpha > n || affinity.ncols() != n {
        return Err(Error::InvalidClusterCount {
            alpha,
            features: n,
        });
    }
    let degree: Vec<f64> = (0..n).map(|i| affinity.row(i).sum()).collect();
    let active: Vec<usize> = (0..n).filter(|&i| degree[i] > 0.0).collect();
    let isolated = n - active.len();
    if isolated > 0 {
        log::warn!("{isolated} feature(s) with zero affinity placed in singleton clusters");
    }

    let mut raw = vec![usize::MAX; n];
    let mut next = 0;
    for i in (0..n).filter(|&i| degree[i] <= 0.0) {
        raw[i] = next;
        next += 1;
    }
    if !active.is_empty() {
        let k = alpha.saturating_sub(isolated).clamp(1, active.len());
        let inv_sqrt: Vec<f64> = active.iter().map(|&i| degree[i].sqrt().recip()).collect();
        let m = active.len();
        let laplacian = DMatrix::from_fn(m, m, |a, b| {
            let norm = affinity[(active[a], active[b])] * inv_sqrt[a] * inv_sqrt[b];
            if a == b {
                1.0 - norm
            } else {
                -norm
            }
        });
        let eig = SymmetricEigen::new(laplacian);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

        let mut embedding = DMatrix::from_fn(m, k, |r, c| eig.eigenvectors[(r, order[c])]);
        for mut row in embedding.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        let labels = kmeans(&embedding, k, seed);
        for (a, &i) in active.iter().enumerate() {
            raw[i] = next + labels[a];
        }
    }
    Ok(relabel(&raw))
}

/// Renumbers labels in order of first appearance.
fn relabel(raw: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    raw.iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Seeded k-means++ with restarts; returns the assignment with the lowest
/// sum of squared distances.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Vec<usize> {
    let rows: Vec<Vec<f64>> = points.row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..KMEANS_RESTARTS {
        let (inertia, labels) = kmeans_once(&rows, k, &mut rng);
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.map(|(_, l)| l).unwrap_or_default()
}

fn kmeans_once(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (f64, Vec<usize>) {
    let n = rows.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut centers = vec![rows[rng.random_range(0..n)].clone()];
    let mut nearest: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centers.push(rows[pick].clone());
        for (d, r) in nearest.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &centers[centers.len() - 1]));
        }
    }

    let mut labels = vec![0; n];
    for iter in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for (i, r) in rows.iter().enumerate() {
            let mut best = (f64::INFINITY, 0);
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(r, center);
                if d < best.0 {
                    best = (d, c);
                }
            }
            if labels[i] != best.1 {
                labels[i] = best.1;
                changed = true;
            }
        }
        if !changed && iter > 0 {
            break;
        }
        let dim = rows[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (r, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(r) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = rows
        .iter()
        .zip(&labels)
        .map(|(r, &l)| sq_dist(r, &centers[l]))
        .sum();
    (inertia, labels)
}
