//! Denoising autoencoder trained under a cyclic cosine schedule, emitting one
//! encoder snapshot (and one embedding of the data) per cycle.

mod io;
mod network;
mod schedule;
mod trainer;

pub use io::{read_snapshot, write_snapshot};
pub use network::{mse_with_gradient, sgd_step, Activation, DenseLayer, ForwardTrace, LayerGradient, Mlp, Sgd};
pub use schedule::{cosine_lr, SnapshotSchedule};
pub use trainer::{encode, train_snapshots, AutoencoderSpec, EmbeddingSet, EncoderSnapshot, TrainOptions};
