//! Pipeline configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! ensemble_size = 6
//! cycle_length = 20
//! metrics = euclidean, cosine, minkowski
//! ```
//!
//! Keys are the snake_case field names of [`PipelineConfig`]; list values are
//! comma separated. `preset = <name>` loads a named preset before the keys
//! that follow it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::dataset::DataFormat;
use crate::error::{Result, SscError};
use crate::landmark::Bandwidth;
use crate::tensor::MetricKind;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Number of snapshots `m`.
    pub ensemble_size: usize,
    /// Epochs per cosine cycle `L`.
    pub cycle_length: usize,
    pub alpha0: f64,
    pub encoding_size: usize,
    pub hidden_layers: Vec<usize>,
    pub landmarks: usize,
    pub sparsity: usize,
    pub metric: MetricKind,
    /// Per-member metrics, assigned round-robin. Set only for the random-metric variant.
    pub metrics: Option<Vec<MetricKind>>,
    pub k: usize,
    pub seed: u64,
    pub repeats: usize,
    pub dataset: Option<PathBuf>,
    pub format: DataFormat,
    pub labels: Option<PathBuf>,
    pub out: Option<PathBuf>,

    pub batch_size: usize,
    pub momentum: f64,
    pub noise_sigma: f64,
    pub per_batch_lr: bool,
    pub sigma: Bandwidth,
    pub landmark_batch: usize,
    pub landmark_iters: usize,
    pub kmeans_restarts: usize,
    pub degree_normalize: bool,
    pub row_normalize: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 6,
            cycle_length: 20,
            alpha0: 0.01,
            encoding_size: 256,
            hidden_layers: vec![512],
            landmarks: 350,
            sparsity: 3,
            metric: MetricKind::Euclidean,
            metrics: None,
            k: 10,
            seed: 0,
            repeats: 5,
            dataset: None,
            format: DataFormat::Csv,
            labels: None,
            out: None,
            batch_size: 64,
            momentum: 0.9,
            noise_sigma: 0.1,
            per_batch_lr: false,
            sigma: Bandwidth::Auto,
            landmark_batch: 1024,
            landmark_iters: 100,
            kmeans_restarts: 10,
            degree_normalize: false,
            row_normalize: false,
        }
    }
}

/// Every key accepted by [`PipelineConfig::set`], in canonical order.
pub const CONFIG_KEYS: &[&str] = &[
    "alpha0",
    "batch_size",
    "cycle_length",
    "dataset",
    "degree_normalize",
    "encoding_size",
    "ensemble_size",
    "format",
    "hidden_layers",
    "k",
    "kmeans_restarts",
    "labels",
    "landmark_batch",
    "landmark_iters",
    "landmarks",
    "metric",
    "metrics",
    "momentum",
    "noise_sigma",
    "out",
    "per_batch_lr",
    "repeats",
    "row_normalize",
    "seed",
    "sigma",
    "sparsity",
];

/// Keys that do not affect results and are left out of the fingerprint.
const UNFINGERPRINTED: &[&str] = &["out"];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| SscError::Config(format!("cannot parse `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl PipelineConfig {
    /// Named hyperparameter sets: `mnist`, `mnist-lr0.003`, `mnist-lr0.03`, `cifar10`.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        match name {
            "mnist" => Ok(base),
            "mnist-lr0.003" => Ok(Self { alpha0: 0.003, ..base }),
            "mnist-lr0.03" => Ok(Self { alpha0: 0.03, ..base }),
            "cifar10" => Ok(Self {
                cycle_length: 40,
                alpha0: 0.2,
                encoding_size: 1024,
                hidden_layers: vec![2048],
                landmarks: 600,
                sparsity: 7,
                ..base
            }),
            other => Err(SscError::Config(format!("unknown preset `{other}`"))),
        }
    }

    pub fn is_key(key: &str) -> bool {
        CONFIG_KEYS.contains(&key)
    }

    /// Assign one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let opt_path = |v: &str| if v.is_empty() { None } else { Some(PathBuf::from(v)) };
        match key {
            "ensemble_size" => self.ensemble_size = parse(key, v)?,
            "cycle_length" => self.cycle_length = parse(key, v)?,
            "alpha0" => self.alpha0 = parse(key, v)?,
            "encoding_size" => self.encoding_size = parse(key, v)?,
            "hidden_layers" => self.hidden_layers = parse_list(key, v)?,
            "landmarks" => self.landmarks = parse(key, v)?,
            "sparsity" => self.sparsity = parse(key, v)?,
            "metric" => self.metric = v.parse()?,
            "metrics" => {
                self.metrics = if v.is_empty() || v == "none" {
                    None
                } else {
                    Some(parse_list(key, v)?)
                }
            }
            "k" => self.k = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "repeats" => self.repeats = parse(key, v)?,
            "dataset" => self.dataset = opt_path(v),
            "format" => self.format = v.parse()?,
            "labels" => self.labels = opt_path(v),
            "out" => self.out = opt_path(v),
            "batch_size" => self.batch_size = parse(key, v)?,
            "momentum" => self.momentum = parse(key, v)?,
            "noise_sigma" => self.noise_sigma = parse(key, v)?,
            "per_batch_lr" => self.per_batch_lr = parse(key, v)?,
            "sigma" => {
                self.sigma = if v == "auto" { Bandwidth::Auto } else { Bandwidth::Fixed(parse(key, v)?) }
            }
            "landmark_batch" => self.landmark_batch = parse(key, v)?,
            "landmark_iters" => self.landmark_iters = parse(key, v)?,
            "kmeans_restarts" => self.kmeans_restarts = parse(key, v)?,
            "degree_normalize" => self.degree_normalize = parse(key, v)?,
            "row_normalize" => self.row_normalize = parse(key, v)?,
            other => return Err(SscError::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Textual value of one field, in the same form `set` accepts.
    pub fn get(&self, key: &str) -> Result<String> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        Ok(match key {
            "ensemble_size" => self.ensemble_size.to_string(),
            "cycle_length" => self.cycle_length.to_string(),
            "alpha0" => self.alpha0.to_string(),
            "encoding_size" => self.encoding_size.to_string(),
            "hidden_layers" => join(&self.hidden_layers),
            "landmarks" => self.landmarks.to_string(),
            "sparsity" => self.sparsity.to_string(),
            "metric" => self.metric.to_string(),
            "metrics" => self.metrics.as_ref().map(|m| join(m)).unwrap_or_else(|| "none".into()),
            "k" => self.k.to_string(),
            "seed" => self.seed.to_string(),
            "repeats" => self.repeats.to_string(),
            "dataset" => path(&self.dataset),
            "format" => self.format.to_string(),
            "labels" => path(&self.labels),
            "out" => path(&self.out),
            "batch_size" => self.batch_size.to_string(),
            "momentum" => self.momentum.to_string(),
            "noise_sigma" => self.noise_sigma.to_string(),
            "per_batch_lr" => self.per_batch_lr.to_string(),
            "sigma" => match self.sigma {
                Bandwidth::Auto => "auto".into(),
                Bandwidth::Fixed(s) => s.to_string(),
            },
            "landmark_batch" => self.landmark_batch.to_string(),
            "landmark_iters" => self.landmark_iters.to_string(),
            "kmeans_restarts" => self.kmeans_restarts.to_string(),
            "degree_normalize" => self.degree_normalize.to_string(),
            "row_normalize" => self.row_normalize.to_string(),
            other => return Err(SscError::Config(format!("unknown configuration key `{other}`"))),
        })
    }

    /// Parse the flat key-value text format on top of the defaults.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                SscError::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            let key = key.trim();
            if key == "preset" {
                *self = Self::preset(value.trim())?;
            } else {
                self.set(key, value)
                    .map_err(|e| SscError::Config(format!("line {}: {e}", lineno + 1)))?;
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SscError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    /// Sorted `key=value` lines covering every result-affecting field.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS.iter().filter(|k| !UNFINGERPRINTED.contains(k)) {
            let _ = writeln!(s, "{key}={}", self.get(key).expect("listed key"));
        }
        s
    }

    /// Full round-trippable dump including non-fingerprinted keys.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(s, "{key} = {}", self.get(key).expect("listed key"));
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`PipelineConfig::canonical`].
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Trainer epochs: `cycle_length * ensemble_size`.
    pub fn total_epochs(&self) -> usize {
        self.cycle_length * self.ensemble_size
    }

    /// Structural checks; violations are configuration errors.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(SscError::Config(m));
        if self.ensemble_size == 0 {
            return fail("ensemble_size must be >= 1".into());
        }
        if self.cycle_length == 0 {
            return fail("cycle_length must be >= 1".into());
        }
        if !(self.alpha0.is_finite() && self.alpha0 > 0.0) {
            return fail(format!("alpha0 must be > 0, got {}", self.alpha0));
        }
        if self.encoding_size == 0 || self.hidden_layers.contains(&0) {
            return fail("layer widths must be >= 1".into());
        }
        if self.landmarks < 2 {
            return fail("landmarks must be >= 2".into());
        }
        if self.sparsity == 0 || self.sparsity >= self.landmarks {
            return fail(format!(
                "sparsity must satisfy 1 <= r < landmarks, got r={} p={}",
                self.sparsity, self.landmarks
            ));
        }
        if self.k == 0 {
            return fail("k must be >= 1".into());
        }
        if self.repeats == 0 || self.batch_size == 0 || self.landmark_batch == 0 {
            return fail("repeats and batch sizes must be >= 1".into());
        }
        if matches!(&self.metrics, Some(m) if m.is_empty()) {
            return fail("metrics list is empty".into());
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return fail(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail("noise_sigma must be >= 0".into());
        }
        if let Bandwidth::Fixed(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return fail(format!("sigma must be > 0 or auto, got {s}"));
            }
        }
        Ok(())
    }

    /// Values outside the studied hyperparameter domains. Allowed, but worth a warning.
    pub fn domain_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let mut check = |name: &str, ok: bool, value: String, domain: &str| {
            if !ok {
                w.push(format!("{name} = {value} is outside the studied domain {{{domain}}}"));
            }
        };
        check(
            "cycle_length",
            [15, 20, 25, 40, 60].contains(&self.cycle_length),
            self.cycle_length.to_string(),
            "15, 20, 25, 40, 60",
        );
        check(
            "alpha0",
            [0.003, 0.007, 0.01, 0.03, 0.1, 0.2, 0.3].contains(&self.alpha0),
            self.alpha0.to_string(),
            "0.003, 0.007, 0.01, 0.03, 0.1, 0.2, 0.3",
        );
        check(
            "encoding_size",
            [128, 256, 512, 1024, 2048].contains(&self.encoding_size),
            self.encoding_size.to_string(),
            "128, 256, 512, 1024, 2048",
        );
        check(
            "landmarks",
            [350, 600, 1000].contains(&self.landmarks),
            self.landmarks.to_string(),
            "350, 600, 1000",
        );
        check("sparsity", [3, 7, 15].contains(&self.sparsity), self.sparsity.to_string(), "3, 7, 15");
        w
    }

    /// Metric of each of the `m` members: the metric list round-robin, or the
    /// single metric everywhere.
    pub fn member_metrics(&self) -> Vec<MetricKind> {
        match &self.metrics {
            Some(list) if !list.is_empty() => {
                (0..self.ensemble_size).map(|i| list[i % list.len()]).collect()
            }
            _ => vec![self.metric; self.ensemble_size],
        }
    }
}
