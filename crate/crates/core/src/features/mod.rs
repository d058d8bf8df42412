//! From string collections to feature vectors, and redundancy reduction by
//! clustering correlated features.

mod correlation;
mod scale;
mod select;
mod spectral;
mod vocab;

pub use correlation::{clamp_positive, correlation_matrix};
pub use scale::Standardizer;
pub use select::{
    fit_selection, select_features, to_matrix, SelectionMask, SelectionParams, SmallClusters,
};
pub use spectral::{kmeans, spectral_cluster, KMEANS_MAX_ITER, KMEANS_RESTARTS};
pub use vocab::{ContinuousKeyList, FeatureVector, NonNumericValue, Slot, Vocabulary};
