//! Configuration, data ingestion, full pipeline runs and sweeps.

pub mod config;
pub mod dataset;
pub mod footprint;
pub mod pipeline;
pub mod sweep;
pub mod synth;

pub use config::PipelineConfig;
pub use dataset::{load_dataset, load_labels, DataFormat, Dataset};
pub use footprint::Footprint;
pub use pipeline::{run_baseline, run_model, run_ssc, run_ssc_rm, train_ensemble, Model, RunOutput, RunRecord};
pub use sweep::{sweep, sweep_table, SweepPoint};
