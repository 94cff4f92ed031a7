//! Dense and sparse matrix primitives, distances and seeded randomness.

mod matrix;
mod metric;
mod rng;
mod sparse;

pub use matrix::DataMatrix;
pub use metric::{distance, squared_euclidean, MetricKind, DEFAULT_MINKOWSKI_Q};
pub use rng::SeededRng;
pub use sparse::{csr_footprint_bytes, spmm_gram, spmm_gram_with_cap, SparseRowMatrix, GRAM_COLUMN_CAP};
