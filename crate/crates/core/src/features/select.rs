use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{clamp_positive, correlation_matrix, spectral_cluster, FeatureVector};
use crate::error::{Error, Result};

/// What happens to clusters with at most `beta` members.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmallClusters {
    /// Every member is kept.
    #[default]
    Keep,
    /// The whole cluster is dropped.
    Discard,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionMask {
    /// Retained vector positions, ascending.
    pub retained: Vec<usize>,
    /// Cluster id of every feature.
    pub cluster_labels: Vec<usize>,
    pub seed: u64,
    pub alpha: usize,
    pub beta: usize,
    pub small_clusters: SmallClusters,
}

impl SelectionMask {
    /// Keeps every feature of a `dim`-wide vector.
    pub fn all(dim: usize) -> Self {
        SelectionMask {
            retained: (0..dim).collect(),
            cluster_labels: (0..dim).collect(),
            seed: 0,
            alpha: dim,
            beta: 0,
            small_clusters: SmallClusters::Keep,
        }
    }

    pub fn apply(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.cluster_labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cluster_labels.len(),
                actual: values.len(),
            });
        }
        Ok(self.retained.iter().map(|&i| values[i]).collect())
    }
}

/// Collapses each cluster larger than `beta` to one randomly drawn member.
///
/// Clusters are visited in ascending label order so the draws depend only
/// on the labels and the seed.
pub fn select_features(
    labels: &[usize],
    beta: usize,
    seed: u64,
    small_clusters: SmallClusters,
) -> SelectionMask {
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        clusters.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut retained = Vec::new();
    for members in clusters.values() {
        if members.len() > beta {
            retained.push(members[rng.random_range(0..members.len())]);
        } else if small_clusters == SmallClusters::Keep {
            retained.extend_from_slice(members);
        }
    }
    retained.sort_unstable();
    SelectionMask {
        retained,
        cluster_labels: labels.to_vec(),
        seed,
        alpha: clusters.len(),
        beta,
        small_clusters,
    }
}

/// Selection hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionParams {
    pub alpha: usize,
    pub beta: usize,
    pub seed: u64,
    pub small_clusters: SmallClusters,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            alpha: 300,
            beta: 4,
            seed: 0,
            small_clusters: SmallClusters::Keep,
        }
    }
}

/// Stacks feature vectors into a samples-by-features matrix.
pub fn to_matrix(vectors: &[FeatureVector]) -> Result<DMatrix<f64>> {
    let d = vectors.first().map_or(0, |v| v.values.len());
    if let Some(v) = vectors.iter().find(|v| v.values.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: v.values.len(),
        });
    }
    Ok(DMatrix::from_fn(vectors.len(), d, |r, c| vectors[r].values[c]))
}

/// Correlation, clamping, clustering and selection on training vectors.
///
/// `alpha` is lowered to the feature count when it exceeds it.
pub fn fit_selection(training: &[FeatureVector], params: &SelectionParams) -> Result<SelectionMask> {
    let x = to_matrix(training)?;
    let d = x.ncols();
    if d == 0 {
        return Err(Error::EmptyVocabulary);
    }
    if training.len() < 2 {
        return Err(Error::EmptyCorpus);
    }
    let alpha = params.alpha.min(d);
    if alpha < params.alpha {
        log::info!("alpha {} lowered to the feature count {d}", params.alpha);
    }
    let affinity = clamp_positive(&correlation_matrix(&x));
    let labels = spectral_cluster(&affinity, alpha, params.seed)?;
    let mut mask = select_features(&labels, params.beta, params.seed, params.small_clusters);
    mask.alpha = alpha;
    Ok(mask)
}
