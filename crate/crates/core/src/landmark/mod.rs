//! Landmark-based sparse affinities: mini-batch k-means landmarks, a Scott-rule
//! bandwidth and Gaussian kernels restricted to each point's `r` nearest landmarks.

mod affinity;
mod bandwidth;
mod minibatch;

pub use affinity::{build_affinity, nearest_landmarks, AffinityParams, Bandwidth, SparseAffinity};
pub use bandwidth::scott_bandwidth;
pub use minibatch::{minibatch_kmeans, quantization_error, LandmarkSet, MiniBatchOptions};
