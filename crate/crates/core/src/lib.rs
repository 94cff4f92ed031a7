//! Snapshot spectral clustering.
//!
//! One denoising autoencoder is trained under a cyclic cosine learning rate;
//! the encoder captured at the end of every cycle yields one embedding of the
//! data. Each embedding becomes a sparse `n x p` landmark affinity, the
//! affinities are concatenated with a `1/sqrt(m)` scale, and k-means on the
//! top left singular vectors of the fused matrix gives the final partition.

pub mod error;
pub mod tensor;

pub use error::{ErrorKind, Result, SscError};
pub mod container;
pub mod snapshot;
pub mod landmark;
pub mod spectral;
pub mod evaluation;
pub mod app;
