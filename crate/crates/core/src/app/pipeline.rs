//! End-to-end runs: snapshot clustering, its random-metric variant, and the
//! baseline roster.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::dataset::{write_labels, Dataset};
use crate::error::{Result, SscError};
use crate::evaluation::{score, EvaluationReport, RunEntry};
use crate::landmark::{build_affinity, minibatch_kmeans, AffinityParams, MiniBatchOptions, SparseAffinity};
use crate::snapshot::{train_snapshots, AutoencoderSpec, EncoderSnapshot, EmbeddingSet, SnapshotSchedule, TrainOptions};
use crate::spectral::{fuse, kmeans, left_singular_vectors, Partition};
use crate::tensor::{DataMatrix, MetricKind, SeededRng};

pub const LABELS_FILE: &str = "labels.txt";
pub const REPORT_FILE: &str = "report.json";
pub const RECORD_FILE: &str = "run_record.json";

/// Stream offsets under each repeat's seed.
const INIT_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const KMEANS_STREAM: u64 = 3;
const LANDMARK_STREAM: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Ssc,
    SscRm,
    Kmeans,
    Lsc,
    DaeKmeans,
    DaeLsc,
}

impl Model {
    pub const BASELINES: [Model; 4] = [Model::Kmeans, Model::DaeKmeans, Model::Lsc, Model::DaeLsc];

    /// Trainer epochs consumed per repeat.
    pub fn trainer_epochs(self, config: &PipelineConfig) -> usize {
        match self {
            Model::Kmeans | Model::Lsc => 0,
            _ => config.total_epochs(),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Ssc => "ssc",
            Model::SscRm => "ssc_rm",
            Model::Kmeans => "kmeans",
            Model::Lsc => "lsc",
            Model::DaeKmeans => "dae_kmeans",
            Model::DaeLsc => "dae_lsc",
        })
    }
}

impl FromStr for Model {
    type Err = SscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ssc" => Ok(Model::Ssc),
            "ssc_rm" => Ok(Model::SscRm),
            "kmeans" => Ok(Model::Kmeans),
            "lsc" => Ok(Model::Lsc),
            "dae_kmeans" => Ok(Model::DaeKmeans),
            "dae_lsc" => Ok(Model::DaeLsc),
            other => Err(SscError::Config(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub model: Model,
    pub config_fingerprint: String,
    pub config: String,
    pub trainer_epochs: usize,
    /// Wall time per stage in seconds, summed over repeats.
    pub stage_seconds: BTreeMap<String, f64>,
    pub artifacts: Vec<PathBuf>,
    pub report: EvaluationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    /// Partition of the first repeat.
    pub partition: Partition,
    pub report: EvaluationReport,
    pub record: RunRecord,
}

impl RunOutput {
    /// Write labels, report and run record into `dir`. On failure the files
    /// written so far are removed.
    pub fn persist(&mut self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let paths: Vec<PathBuf> = [LABELS_FILE, REPORT_FILE, RECORD_FILE].iter().map(|f| dir.join(f)).collect();
        self.record.artifacts = paths.clone();
        let result = (|| -> Result<()> {
            let mut labels = Vec::new();
            write_labels(&mut labels, &self.partition.labels)?;
            std::fs::write(&paths[0], labels)?;
            std::fs::write(&paths[1], self.report.to_json())?;
            let record = serde_json::to_string_pretty(&self.record).expect("record is plain data");
            std::fs::write(&paths[2], record)?;
            Ok(())
        })();
        if result.is_err() {
            for p in &paths {
                let _ = std::fs::remove_file(p);
            }
        }
        result
    }
}

#[derive(Default)]
struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage));
        *self.0.entry(stage.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }
}

/// Seed of repeat `r`.
pub fn repeat_seed(config: &PipelineConfig, r: usize) -> u64 {
    SeededRng::new(config.seed).fork(r as u64).seed()
}

pub fn run_ssc(config: &PipelineConfig, data: &Dataset) -> Result<RunOutput> {
    run_model(Model::Ssc, config, data)
}

pub fn run_ssc_rm(config: &PipelineConfig, data: &Dataset) -> Result<RunOutput> {
    run_model(Model::SscRm, config, data)
}

pub fn run_baseline(model: Model, config: &PipelineConfig, data: &Dataset) -> Result<RunOutput> {
    if !Model::BASELINES.contains(&model) {
        return Err(SscError::Config(format!("`{model}` is not a baseline model")));
    }
    run_model(model, config, data)
}

/// Run `model` for `config.repeats` repeats and aggregate the scores.
pub fn run_model(model: Model, config: &PipelineConfig, data: &Dataset) -> Result<RunOutput> {
    config.validate()?;
    if model == Model::SscRm && config.metrics.is_none() {
        return Err(SscError::Config("the random-metric variant needs a metrics list".into()));
    }
    for w in config.domain_warnings() {
        log::warn!("{w}");
    }
    let fingerprint = config.fingerprint();
    let mut timer = Timer::default();
    let mut first = None;
    let mut runs = Vec::with_capacity(config.repeats);
    for r in 0..config.repeats {
        let seed = repeat_seed(config, r);
        let partition = run_once(model, config, &data.x, SeededRng::new(seed), &mut timer)?;
        let scores = data.labels.as_ref().map(|t| score(&partition.labels, t)).transpose()?;
        log::info!(
            "{model} repeat {r}: inertia {:.6}{}",
            partition.inertia,
            scores.map(|s| format!(", nmi {:.4}", s.0)).unwrap_or_default()
        );
        runs.push(RunEntry {
            repeat: r,
            seed,
            inertia: partition.inertia,
            nmi: scores.map(|s| s.0),
            ari: scores.map(|s| s.1),
            acc: scores.map(|s| s.2),
        });
        first.get_or_insert(partition);
    }
    let report = EvaluationReport::from_runs(runs, fingerprint.clone());
    let record = RunRecord {
        model,
        config_fingerprint: fingerprint,
        config: config.canonical(),
        trainer_epochs: model.trainer_epochs(config),
        stage_seconds: timer.0,
        artifacts: Vec::new(),
        report: report.clone(),
    };
    Ok(RunOutput { partition: first.expect("repeats >= 1"), report, record })
}

fn autoencoder(config: &PipelineConfig, input: usize, rng: &SeededRng) -> Result<AutoencoderSpec> {
    Ok(AutoencoderSpec::symmetric(input, &config.hidden_layers, config.encoding_size)
        .map_err(|e| SscError::Config(e.to_string()))?
        .with_noise(config.noise_sigma)
        .with_init_seed(rng.fork(INIT_STREAM).seed()))
}

/// Train the autoencoder with `cycles` snapshots over `L·m` epochs.
fn train(
    config: &PipelineConfig,
    x: &DataMatrix,
    cycles: usize,
    rng: &SeededRng,
) -> Result<(Vec<EncoderSnapshot>, EmbeddingSet)> {
    let spec = autoencoder(config, x.cols(), rng)?;
    let schedule = SnapshotSchedule::new(config.alpha0, config.total_epochs(), cycles)?;
    let options = TrainOptions {
        batch_size: config.batch_size.min(x.rows()),
        momentum: config.momentum,
        per_batch_lr: config.per_batch_lr,
    };
    train_snapshots(x, &spec, &schedule, &options, rng.fork(TRAIN_STREAM))
}

/// Snapshots and embeddings of the first repeat, as used by `run_ssc`.
pub fn train_ensemble(config: &PipelineConfig, x: &DataMatrix) -> Result<(Vec<EncoderSnapshot>, EmbeddingSet)> {
    config.validate()?;
    let rng = SeededRng::new(repeat_seed(config, 0));
    train(config, x, config.ensemble_size, &rng).map_err(|e| e.in_stage("train"))
}

fn member_affinity(
    config: &PipelineConfig,
    y: &DataMatrix,
    metric: MetricKind,
    rng: SeededRng,
    timer: &mut Timer,
) -> Result<SparseAffinity> {
    let options = MiniBatchOptions {
        batch_size: config.landmark_batch,
        max_iters: config.landmark_iters,
        ..MiniBatchOptions::default()
    };
    let landmarks = timer.time("landmarks", || minibatch_kmeans(y, config.landmarks, &options, rng))?;
    let params = AffinityParams {
        r: config.sparsity,
        metric,
        sigma: config.sigma,
        degree_normalize: config.degree_normalize,
    };
    timer.time("affinity", || build_affinity(y, &landmarks, &params))
}

fn spectral_partition(
    config: &PipelineConfig,
    members: &[SparseAffinity],
    rng: SeededRng,
    timer: &mut Timer,
) -> Result<Partition> {
    let fused = timer.time("fuse", || fuse(members))?;
    let embedding = timer.time("svd", || left_singular_vectors(&fused.matrix, config.k))?;
    let u = if config.row_normalize { embedding.row_normalized()? } else { embedding.u };
    timer.time("kmeans", || kmeans(&u, config.k, config.kmeans_restarts, rng))
}

fn run_once(model: Model, config: &PipelineConfig, x: &DataMatrix, rng: SeededRng, timer: &mut Timer) -> Result<Partition> {
    let kmeans_rng = rng.fork(KMEANS_STREAM);
    match model {
        Model::Kmeans => timer.time("kmeans", || kmeans(x, config.k, config.kmeans_restarts, kmeans_rng)),
        Model::Lsc => {
            let member = member_affinity(config, x, config.metric, rng.fork(LANDMARK_STREAM), timer)?;
            spectral_partition(config, &[member], kmeans_rng, timer)
        }
        Model::DaeKmeans => {
            let (_, set) = timer.time("train", || train(config, x, 1, &rng))?;
            timer.time("kmeans", || kmeans(&set.members()[0], config.k, config.kmeans_restarts, kmeans_rng))
        }
        Model::DaeLsc | Model::Ssc | Model::SscRm => {
            let (cycles, metrics) = match model {
                Model::DaeLsc => (1, vec![config.metric]),
                Model::Ssc => (config.ensemble_size, vec![config.metric; config.ensemble_size]),
                _ => (config.ensemble_size, config.member_metrics()),
            };
            let (_, set) = timer.time("train", || train(config, x, cycles, &rng))?;
            let mut members = Vec::with_capacity(set.len());
            for (i, (y, &metric)) in set.members().iter().zip(&metrics).enumerate() {
                members.push(member_affinity(config, y, metric, rng.fork(LANDMARK_STREAM + i as u64), timer)?);
            }
            spectral_partition(config, &members, kmeans_rng, timer)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::app::synth::blobs;

    fn small_config() -> PipelineConfig {
        PipelineConfig {
            ensemble_size: 2,
            cycle_length: 3,
            alpha0: 0.01,
            encoding_size: 3,
            hidden_layers: vec![8],
            landmarks: 12,
            sparsity: 3,
            k: 3,
            repeats: 2,
            batch_size: 16,
            kmeans_restarts: 3,
            ..Default::default()
        }
    }

    #[test]
    fn model_names_roundtrip() {
        for m in [Model::Ssc, Model::SscRm, Model::Kmeans, Model::Lsc, Model::DaeKmeans, Model::DaeLsc] {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert!("spectral".parse::<Model>().is_err());
    }

    #[test]
    fn random_metric_variant_requires_a_list() {
        let data = blobs(60, 5, 3, 0.2, 4.0, 1).unwrap();
        let err = run_ssc_rm(&small_config(), &data).unwrap_err();
        assert!(matches!(err, SscError::Config(_)));
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let data = blobs(60, 5, 3, 0.2, 4.0, 1).unwrap();
        let cfg = PipelineConfig { landmarks: 60, sparsity: 3, ..small_config() };
        match run_ssc(&cfg, &data).unwrap_err() {
            SscError::Stage { stage, .. } => assert_eq!(stage, "landmarks"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn records_budget_and_repeats() {
        let data = blobs(60, 5, 3, 0.2, 4.0, 1).unwrap();
        let cfg = small_config();
        let out = run_ssc(&cfg, &data).unwrap();
        assert_eq!(out.record.trainer_epochs, 6);
        assert_eq!(out.report.runs.len(), 2);
        assert_ne!(out.report.runs[0].seed, out.report.runs[1].seed);
        assert!(out.record.stage_seconds.contains_key("svd"));
        let base = run_baseline(Model::DaeKmeans, &cfg, &data).unwrap();
        assert_eq!(base.record.trainer_epochs, out.record.trainer_epochs);
        assert!(run_baseline(Model::Ssc, &cfg, &data).is_err());
    }

    #[test]
    fn persist_writes_three_files() {
        let data = blobs(30, 4, 3, 0.1, 4.0, 2).unwrap();
        let cfg = PipelineConfig { repeats: 1, ..small_config() };
        let mut out = run_baseline(Model::Kmeans, &cfg, &data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        out.persist(dir.path()).unwrap();
        let labels = std::fs::read_to_string(dir.path().join(LABELS_FILE)).unwrap();
        assert_eq!(labels.lines().count(), 30);
        assert!(dir.path().join(REPORT_FILE).exists() && dir.path().join(RECORD_FILE).exists());
    }

    #[test]
    fn persist_cleans_up_on_failure() {
        let data = blobs(30, 4, 3, 0.1, 4.0, 2).unwrap();
        let cfg = PipelineConfig { repeats: 1, ..small_config() };
        let mut out = run_baseline(Model::Kmeans, &cfg, &data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        // a directory in place of the record file makes the last write fail
        std::fs::create_dir(dir.path().join(RECORD_FILE)).unwrap();
        assert!(out.persist(dir.path()).is_err());
        assert!(!dir.path().join(LABELS_FILE).exists());
        assert!(!dir.path().join(REPORT_FILE).exists());
    }
}
