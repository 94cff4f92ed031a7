use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bandwidth::scott_bandwidth;
use super::minibatch::LandmarkSet;
use crate::error::{Result, SscError};
use crate::tensor::{distance, DataMatrix, MetricKind, SparseRowMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// Scott's rule on the embedding being converted.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityParams {
    /// Landmarks kept per row.
    pub r: usize,
    pub metric: MetricKind,
    pub sigma: Bandwidth,
    /// Divide every column by the square root of its sum after row
    /// normalization. Off by default; rows then no longer sum to one.
    pub degree_normalize: bool,
}

impl AffinityParams {
    pub fn new(r: usize, metric: MetricKind) -> Self {
        Self { r, metric, sigma: Bandwidth::Auto, degree_normalize: false }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = Bandwidth::Fixed(sigma);
        self
    }
}

/// Row-stochastic `n x p` kernel affinity between points and their nearest landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAffinity {
    pub matrix: SparseRowMatrix,
    pub params: AffinityParams,
    /// Bandwidth actually used (resolved when `params.sigma` is `Auto`).
    pub sigma: f64,
    pub landmark_ref: String,
}

/// Indices of the `r` landmarks nearest to `x`, nearest first; equal
/// distances go to the lower index.
pub fn nearest_landmarks(
    x: &[f64],
    landmarks: &LandmarkSet,
    r: usize,
    metric: MetricKind,
) -> Result<Vec<usize>> {
    Ok(nearest_with_distances(x, landmarks.centers(), r, metric)?
        .into_iter()
        .map(|(j, _)| j)
        .collect())
}

fn nearest_with_distances(
    x: &[f64],
    centers: &DataMatrix,
    r: usize,
    metric: MetricKind,
) -> Result<Vec<(usize, f64)>> {
    let p = centers.rows();
    if r == 0 || r >= p {
        return Err(SscError::InvalidArgument(format!("need 1 <= r < p, got r={r}, p={p}")));
    }
    let mut all = centers
        .iter_rows()
        .enumerate()
        .map(|(j, u)| Ok((j, distance(x, u, metric)?)))
        .collect::<Result<Vec<(usize, f64)>>>()?;
    let order = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    all.select_nth_unstable_by(r - 1, order);
    all.truncate(r);
    all.sort_by(order);
    Ok(all)
}

/// Build the sparse affinity of `y` against `landmarks`.
///
/// Row `i` holds `exp(-dist²/2σ²)` for its `r` nearest landmarks, divided by
/// the row total. Kernels are evaluated relative to the nearest retained
/// landmark, which leaves the normalized values unchanged and keeps the
/// largest term at exactly one.
pub fn build_affinity(
    y: &DataMatrix,
    landmarks: &LandmarkSet,
    params: &AffinityParams,
) -> Result<SparseAffinity> {
    if y.cols() != landmarks.dims() {
        return Err(SscError::DimensionMismatch(format!(
            "embedding has {} columns, landmarks have {}",
            y.cols(),
            landmarks.dims()
        )));
    }
    let p = landmarks.len();
    let r = params.r;
    if r == 0 || r >= p {
        return Err(SscError::InvalidArgument(format!("need 1 <= r < p, got r={r}, p={p}")));
    }
    let sigma = match params.sigma {
        Bandwidth::Auto => scott_bandwidth(y)?,
        Bandwidth::Fixed(s) if s.is_finite() && s > 0.0 => s,
        Bandwidth::Fixed(s) => {
            return Err(SscError::InvalidArgument(format!("bandwidth must be > 0, got {s}")))
        }
    };
    let two_sigma_sq = 2.0 * sigma * sigma;

    let rows: Vec<Result<Vec<(u32, f64)>>> = (0..y.rows())
        .into_par_iter()
        .map(|i| {
            let near = nearest_with_distances(y.row(i), landmarks.centers(), r, params.metric)?;
            let d0 = near[0].1 * near[0].1;
            let mut entries: Vec<(u32, f64)> = near
                .iter()
                .map(|&(j, dj)| (j as u32, (-(dj * dj - d0) / two_sigma_sq).exp()))
                .collect();
            let total: f64 = entries.iter().map(|e| e.1).sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(SscError::KernelUnderflow { row: i });
            }
            entries.iter_mut().for_each(|e| e.1 /= total);
            entries.sort_by_key(|e| e.0);
            Ok(entries)
        })
        .collect();

    let mut row_offsets = Vec::with_capacity(y.rows() + 1);
    let mut col_indices = Vec::with_capacity(y.rows() * r);
    let mut values = Vec::with_capacity(y.rows() * r);
    row_offsets.push(0);
    for row in rows {
        for (j, v) in row? {
            col_indices.push(j);
            values.push(v);
        }
        row_offsets.push(col_indices.len());
    }

    if params.degree_normalize {
        let mut degree = vec![0.0; p];
        for (&j, &v) in col_indices.iter().zip(&values) {
            degree[j as usize] += v;
        }
        for (&j, v) in col_indices.iter().zip(values.iter_mut()) {
            let dj = degree[j as usize];
            if dj > 0.0 {
                *v /= dj.sqrt();
            }
        }
    }

    let matrix = SparseRowMatrix::from_parts(y.rows(), p, row_offsets, col_indices, values)?;
    Ok(SparseAffinity { matrix, params: *params, sigma, landmark_ref: landmarks.fingerprint() })
}
