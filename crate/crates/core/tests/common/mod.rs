#![allow(dead_code)]

pub mod random_tree;
pub mod synthetic;
pub mod writer;

use std::path::PathBuf;

/// Directory of the bundled synthetic corpus.
pub fn synthetic_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic")
}

/// `per_class` points around each center with unit-variance Gaussian noise.
/// Labels are `c0`, `c1`, ... in center order.
pub fn gaussian_blobs(centers: &[Vec<f64>], per_class: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<String>) {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            rows.push(
                center
                    .iter()
                    .map(|m| m + <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                    .collect(),
            );
            labels.push(format!("c{c}"));
        }
    }
    (rows, labels)
}
