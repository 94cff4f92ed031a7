use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::network::{mse_with_gradient, Activation, DenseLayer, Mlp, Sgd};
use super::schedule::{cosine_lr, SnapshotSchedule};
use crate::error::{Result, SscError};
use crate::tensor::{DataMatrix, SeededRng};

/// Shape and noise model of a symmetric, undercomplete denoising autoencoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderSpec {
    /// Full symmetric width list `d -> ... -> d' -> ... -> d`.
    pub layer_widths: Vec<usize>,
    /// Activation of the hidden layers. The code layer and the reconstruction
    /// layer are always linear.
    pub activation: Activation,
    pub input_noise_sigma: f64,
    pub init_seed: u64,
}

impl AutoencoderSpec {
    /// `input -> hidden... -> encoding -> reversed hidden... -> input`.
    pub fn symmetric(input: usize, hidden: &[usize], encoding: usize) -> Result<Self> {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(encoding);
        widths.extend(hidden.iter().rev());
        widths.push(input);
        let spec = Self {
            layer_widths: widths,
            activation: Activation::Relu,
            input_noise_sigma: 0.1,
            init_seed: 0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.input_noise_sigma = sigma;
        self
    }

    pub fn with_init_seed(mut self, seed: u64) -> Self {
        self.init_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.layer_widths;
        if w.len() < 3 || w.len() % 2 == 0 {
            return Err(SscError::InvalidArgument(format!(
                "autoencoder widths must be an odd-length symmetric list, got {w:?}"
            )));
        }
        if w.iter().any(|&x| x == 0) {
            return Err(SscError::InvalidArgument("layer widths must be >= 1".into()));
        }
        if w.iter().ne(w.iter().rev()) {
            return Err(SscError::InvalidArgument(format!("widths {w:?} are not symmetric")));
        }
        if self.encoding_width() >= self.input_width() {
            return Err(SscError::InvalidArgument(format!(
                "encoding width {} must be smaller than input width {}",
                self.encoding_width(),
                self.input_width()
            )));
        }
        if !(self.input_noise_sigma.is_finite() && self.input_noise_sigma >= 0.0) {
            return Err(SscError::InvalidArgument("noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.layer_widths[0]
    }

    pub fn encoding_width(&self) -> usize {
        self.layer_widths[self.layer_widths.len() / 2]
    }

    fn encoder_layers(&self) -> usize {
        (self.layer_widths.len() - 1) / 2
    }

    fn activations(&self) -> Vec<Activation> {
        let layers = self.layer_widths.len() - 1;
        let code = self.encoder_layers() - 1;
        (0..layers)
            .map(|l| if l == code || l == layers - 1 { Activation::Identity } else { self.activation })
            .collect()
    }
}

/// Frozen encoder half captured at the end of one learning-rate cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderSnapshot {
    pub layers: Vec<DenseLayer>,
    /// 1-based cycle this snapshot closes.
    pub cycle_index: usize,
    /// Mean squared reconstruction error over the capture epoch.
    pub train_loss: f64,
}

impl EncoderSnapshot {
    pub fn input_width(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn encoding_width(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }
}

/// `m` embeddings of the same `n` points, one per snapshot.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    members: Vec<DataMatrix>,
    provenance: String,
}

impl EmbeddingSet {
    pub fn new(members: Vec<DataMatrix>, provenance: String) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| SscError::InvalidArgument("embedding set needs at least one member".into()))?;
        let shape = first.shape();
        if let Some(i) = members.iter().position(|m| m.shape() != shape) {
            return Err(SscError::DimensionMismatch(format!(
                "member {i} has shape {:?}, expected {shape:?}",
                members[i].shape()
            )));
        }
        Ok(Self { members, provenance })
    }

    pub fn members(&self) -> &[DataMatrix] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// JSON describing the schedule and network that produced the members.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub batch_size: usize,
    pub momentum: f64,
    /// Advance the cosine schedule every mini-batch instead of every epoch.
    pub per_batch_lr: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { batch_size: 64, momentum: 0.9, per_batch_lr: false }
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    schedule: &'a SnapshotSchedule,
    spec: &'a AutoencoderSpec,
    options: &'a TrainOptions,
}

/// Train one autoencoder under the cyclic schedule and return the encoder
/// captured at the end of every cycle, with the matching noise-free embeddings.
///
/// `schedule` counts epochs. Shuffling and input noise draw from streams
/// forked off `rng` per epoch; weight initialization uses `spec.init_seed`.
pub fn train_snapshots(
    x: &DataMatrix,
    spec: &AutoencoderSpec,
    schedule: &SnapshotSchedule,
    options: &TrainOptions,
    rng: SeededRng,
) -> Result<(Vec<EncoderSnapshot>, EmbeddingSet)> {
    spec.validate()?;
    let (n, d) = x.shape();
    if d != spec.input_width() {
        return Err(SscError::DimensionMismatch(format!(
            "data has {d} columns, autoencoder expects {}",
            spec.input_width()
        )));
    }
    if options.batch_size == 0 || options.batch_size > n {
        return Err(SscError::InvalidArgument(format!(
            "batch size {} must be in 1..={n}",
            options.batch_size
        )));
    }

    let mut net = Mlp::init(&spec.layer_widths, &spec.activations(), SeededRng::new(spec.init_seed))?;
    let mut sgd = Sgd::new(&net, options.momentum);
    let batches_per_epoch = n.div_ceil(options.batch_size);
    let step_schedule = if options.per_batch_lr {
        SnapshotSchedule::new(
            schedule.alpha0(),
            schedule.total_steps() * batches_per_epoch,
            schedule.cycles(),
        )?
    } else {
        *schedule
    };
    let capture_at = schedule.snapshot_steps();
    let encoder_layers = spec.encoder_layers();

    let mut order: Vec<usize> = (0..n).collect();
    let mut snapshots = Vec::with_capacity(schedule.cycles());
    let mut embeddings = Vec::with_capacity(schedule.cycles());
    let mut step = 0usize;

    for epoch in 1..=schedule.total_steps() {
        let mut shuffle_rng = rng.fork(2 * epoch as u64).generator();
        let mut noise_rng = rng.fork(2 * epoch as u64 + 1).generator();
        order.shuffle(&mut shuffle_rng);

        let mut epoch_loss = 0.0;
        let mut lr = 0.0;
        for (b, chunk) in order.chunks(options.batch_size).enumerate() {
            if options.per_batch_lr || b == 0 {
                step += 1;
                lr = cosine_lr(step, &step_schedule)?;
            }
            let rows = chunk.len();
            let mut target = Vec::with_capacity(rows * d);
            for &i in chunk {
                target.extend_from_slice(x.row(i));
            }
            let input: Vec<f64> = if spec.input_noise_sigma > 0.0 {
                target
                    .iter()
                    .map(|&v| v + spec.input_noise_sigma * noise_rng.sample::<f64, _>(StandardNormal))
                    .collect()
            } else {
                target.clone()
            };

            let trace = net.forward(&input, rows);
            let (loss, grad) = mse_with_gradient(trace.output(), &target);
            if !loss.is_finite() {
                return Err(SscError::Divergence { epoch, lr, loss });
            }
            let grads = net.backward(&trace, &grad);
            sgd.step(&mut net, &grads, lr).map_err(|e| match e {
                SscError::NonFinite(_) => SscError::Divergence { epoch, lr, loss: f64::NAN },
                other => other,
            })?;
            epoch_loss += loss * rows as f64;
        }
        let epoch_loss = epoch_loss / n as f64;
        log::debug!("epoch {epoch}: lr {lr:.6} loss {epoch_loss:.6}");

        for _ in capture_at.iter().filter(|&&s| s == epoch) {
            let snapshot = EncoderSnapshot {
                layers: net.layers[..encoder_layers].to_vec(),
                cycle_index: snapshots.len() + 1,
                train_loss: epoch_loss,
            };
            if snapshot.layers.iter().any(|l| l.weights.iter().chain(&l.biases).any(|v| !v.is_finite())) {
                return Err(SscError::Divergence { epoch, lr, loss: epoch_loss });
            }
            embeddings.push(encode(x, &snapshot)?);
            snapshots.push(snapshot);
        }
    }

    let provenance = serde_json::to_string(&Provenance { schedule, spec, options })
        .expect("provenance is plain data");
    Ok((snapshots, EmbeddingSet::new(embeddings, provenance)?))
}

/// Noise-free forward pass through an encoder snapshot.
pub fn encode(x: &DataMatrix, snapshot: &EncoderSnapshot) -> Result<DataMatrix> {
    if x.cols() != snapshot.input_width() {
        return Err(SscError::DimensionMismatch(format!(
            "data has {} columns, encoder expects {}",
            x.cols(),
            snapshot.input_width()
        )));
    }
    let encoder = Mlp::new(snapshot.layers.clone())?;
    let out = encoder.predict(x.as_slice(), x.rows());
    DataMatrix::new(x.rows(), encoder.output_width(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> DataMatrix {
        DataMatrix::from_rows(&[
            vec![0.0, 0.1, 0.9],
            vec![1.0, 0.2, 0.3],
            vec![0.5, 0.5, 0.5],
            vec![0.2, 0.8, 0.1],
        ])
        .unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(AutoencoderSpec::symmetric(4, &[3], 2).is_ok());
        assert!(AutoencoderSpec::symmetric(4, &[3], 4).is_err());
        assert!(AutoencoderSpec::symmetric(4, &[0], 2).is_err());
        let mut s = AutoencoderSpec::symmetric(4, &[3], 2).unwrap();
        s.layer_widths = vec![4, 3, 2, 4, 4];
        assert!(s.validate().is_err());
    }

    #[test]
    fn code_and_output_layers_are_linear() {
        let s = AutoencoderSpec::symmetric(8, &[6, 4], 2).unwrap();
        use Activation::*;
        assert_eq!(s.activations(), vec![Relu, Relu, Identity, Relu, Relu, Identity]);
    }

    #[test]
    fn single_cycle_shape_contract() {
        let x = tiny();
        let spec = AutoencoderSpec::symmetric(3, &[4], 2).unwrap();
        let sched = SnapshotSchedule::new(0.01, 1, 1).unwrap();
        let opts = TrainOptions { batch_size: 2, ..Default::default() };
        let (snaps, emb) = train_snapshots(&x, &spec, &sched, &opts, SeededRng::new(1)).unwrap();
        assert_eq!(snaps.len(), 1);
        assert_eq!(emb.len(), 1);
        assert_eq!(emb.members()[0].shape(), (4, 2));
        assert_eq!(snaps[0].cycle_index, 1);
    }

    #[test]
    fn batch_size_checked() {
        let x = tiny();
        let spec = AutoencoderSpec::symmetric(3, &[4], 2).unwrap();
        let sched = SnapshotSchedule::new(0.01, 1, 1).unwrap();
        let opts = TrainOptions { batch_size: 5, ..Default::default() };
        assert!(train_snapshots(&x, &spec, &sched, &opts, SeededRng::new(1)).is_err());
    }

    #[test]
    fn divergence_reports_epoch_and_lr() {
        let x = tiny().scaled(1e3).unwrap();
        let spec = AutoencoderSpec::symmetric(3, &[4], 2).unwrap().with_noise(0.0);
        let sched = SnapshotSchedule::new(1e6, 50, 1).unwrap();
        let opts = TrainOptions { batch_size: 4, ..Default::default() };
        match train_snapshots(&x, &spec, &sched, &opts, SeededRng::new(1)) {
            Err(SscError::Divergence { epoch, lr, .. }) => {
                assert!(epoch >= 1);
                assert!(lr > 0.0);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn encode_zero_and_identity() {
        let x = tiny();
        let zero = EncoderSnapshot {
            layers: vec![DenseLayer::zeros(3, 2, Activation::Relu)],
            cycle_index: 1,
            train_loss: 0.0,
        };
        assert!(encode(&x, &zero).unwrap().as_slice().iter().all(|&v| v == 0.0));

        let mut eye = DenseLayer::zeros(3, 3, Activation::Identity);
        for i in 0..3 {
            eye.weights[i * 3 + i] = 1.0;
        }
        let snap = EncoderSnapshot { layers: vec![eye], cycle_index: 1, train_loss: 0.0 };
        assert_eq!(encode(&x, &snap).unwrap(), x);

        let wrong = DataMatrix::zeros(2, 5).unwrap();
        assert!(matches!(encode(&wrong, &snap), Err(SscError::DimensionMismatch(_))));
    }
}
