use std::io::{Read, Write};

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::container::{read_container, write_container, Block, LANDMARK_MAGIC};
use crate::error::{Result, SscError};
use crate::spectral::kmeans_pp_init;
use crate::tensor::{squared_euclidean, DataMatrix, MetricKind, SeededRng};

/// `p` representative points of one embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    centers: DataMatrix,
    /// Metric used while selecting the landmarks; always euclidean.
    source_metric: MetricKind,
    seed: u64,
}

impl LandmarkSet {
    pub fn new(centers: DataMatrix, seed: u64) -> Result<Self> {
        if centers.rows() < 2 {
            return Err(SscError::InvalidArgument(format!(
                "need at least 2 landmarks, got {}",
                centers.rows()
            )));
        }
        Ok(Self { centers, source_metric: MetricKind::Euclidean, seed })
    }

    pub fn centers(&self) -> &DataMatrix {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.rows()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dims(&self) -> usize {
        self.centers.cols()
    }

    pub fn source_metric(&self) -> MetricKind {
        self.source_metric
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Hex SHA-256 prefix of the center values, shape and seed.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.centers.rows() as u64).to_le_bytes());
        h.update((self.centers.cols() as u64).to_le_bytes());
        h.update(self.seed.to_le_bytes());
        for v in self.centers.as_slice() {
            h.update(v.to_le_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Serialize as an `SSCL` container: one `p x d'` block whose bias slot is zero.
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let block = Block {
            rows: self.centers.rows(),
            cols: self.centers.cols(),
            values: self.centers.as_slice().to_vec(),
            biases: vec![0.0; self.centers.rows()],
        };
        let meta = serde_json::json!({
            "landmarks": self.centers.rows(),
            "source_metric": self.source_metric.to_string(),
            "seed": self.seed,
        });
        write_container(w, LANDMARK_MAGIC, &[block], &meta.to_string())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let (mut blocks, meta) = read_container(r, LANDMARK_MAGIC)?;
        if blocks.len() != 1 {
            return Err(SscError::Data(format!("landmark file holds {} blocks", blocks.len())));
        }
        let meta: serde_json::Value =
            serde_json::from_str(&meta).map_err(|e| SscError::Data(format!("landmark metadata: {e}")))?;
        let seed = meta["seed"].as_u64().ok_or_else(|| SscError::Data("missing seed".into()))?;
        let b = blocks.pop().expect("one block");
        Self::new(DataMatrix::new(b.rows, b.cols, b.values)?, seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiniBatchOptions {
    pub batch_size: usize,
    pub max_iters: usize,
    /// Stop once `‖ΔC‖_F <= tol * ‖C‖_F` over one batch.
    pub tol: f64,
}

impl Default for MiniBatchOptions {
    fn default() -> Self {
        Self { batch_size: 1024, max_iters: 100, tol: 1e-4 }
    }
}

/// Mini-batch k-means with per-center learning rate `1 / count`.
///
/// Centers start from k-means++ on a uniform subset of `max(10p, 2048)` rows.
/// A center that has never received a point after a batch is reseeded onto
/// the batch point farthest from its assigned center.
pub fn minibatch_kmeans(
    y: &DataMatrix,
    p: usize,
    options: &MiniBatchOptions,
    rng: SeededRng,
) -> Result<LandmarkSet> {
    let (n, d) = y.shape();
    if p < 2 || p >= n {
        return Err(SscError::InvalidArgument(format!(
            "landmark count {p} must satisfy 2 <= p < n = {n}"
        )));
    }
    let mut init_rng = rng.fork(0).generator();
    let subset_size = n.min((10 * p).max(2048));
    let mut subset = sample(&mut init_rng, n, subset_size).into_vec();
    subset.sort_unstable();
    let seeds = match kmeans_pp_init(&y.select_rows(&subset)?, p, &mut init_rng) {
        Ok(s) => s.into_iter().map(|i| subset[i]).collect(),
        Err(_) if subset_size < n => kmeans_pp_init(y, p, &mut init_rng)?,
        Err(e) => return Err(e),
    };
    let mut centers: Vec<f64> = seeds.iter().flat_map(|&i| y.row(i).iter().copied()).collect();
    let mut counts = vec![0u64; p];
    let batch_size = options.batch_size.clamp(1, n);

    for iter in 0..options.max_iters {
        let mut batch_rng = rng.fork(iter as u64 + 1).generator();
        let batch = sample(&mut batch_rng, n, batch_size).into_vec();
        let assigned: Vec<(usize, f64)> = batch
            .par_iter()
            .map(|&i| {
                let x = y.row(i);
                let mut best = (0, f64::INFINITY);
                for c in 0..p {
                    let dist = squared_euclidean(x, &centers[c * d..(c + 1) * d]);
                    if dist < best.1 {
                        best = (c, dist);
                    }
                }
                best
            })
            .collect();

        let before = centers.clone();
        for (&i, &(c, _)) in batch.iter().zip(&assigned) {
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            for (cv, &xv) in centers[c * d..(c + 1) * d].iter_mut().zip(y.row(i)) {
                *cv += eta * (xv - *cv);
            }
        }

        let dead: Vec<usize> = (0..p).filter(|&c| counts[c] == 0).collect();
        if !dead.is_empty() {
            let mut far: Vec<(usize, f64)> = batch.iter().zip(&assigned).map(|(&i, a)| (i, a.1)).collect();
            far.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for (&c, &(i, _)) in dead.iter().zip(&far) {
                centers[c * d..(c + 1) * d].copy_from_slice(y.row(i));
                counts[c] = 1;
            }
        }

        let shift: f64 = squared_euclidean(&centers, &before).sqrt();
        let norm: f64 = before.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dead.is_empty() && shift <= options.tol * norm {
            log::debug!("mini-batch k-means converged after {} batches", iter + 1);
            break;
        }
    }
    LandmarkSet::new(DataMatrix::new(p, d, centers)?, rng.seed())
}

/// Mean squared distance from each row of `y` to its nearest center.
pub fn quantization_error(y: &DataMatrix, centers: &DataMatrix) -> f64 {
    let total: f64 = (0..y.rows())
        .into_par_iter()
        .map(|i| {
            centers
                .iter_rows()
                .map(|c| squared_euclidean(y.row(i), c))
                .fold(f64::INFINITY, f64::min)
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    total / y.rows() as f64
}
