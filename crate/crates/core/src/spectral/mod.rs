//! Consensus stage: fuse member affinities, take the top left singular
//! vectors of the fused matrix and cluster them with k-means.

mod fuse;
mod kmeans;
mod svd;

pub use fuse::{fuse, FusedAffinity};
pub use kmeans::{kmeans, kmeans_pp_init, lloyd, refine_single_moves, LloydOutcome, Partition, DEFAULT_RESTARTS, MAX_LLOYD_ITERATIONS};
pub use svd::{left_singular_vectors, SpectralEmbedding, RANK_TOLERANCE};
