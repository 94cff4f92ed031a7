//! Seeded synthetic datasets with known labels.

use rand::Rng;
use rand_distr::StandardNormal;

use super::dataset::Dataset;
use crate::error::{Result, SscError};
use crate::tensor::{DataMatrix, SeededRng};

/// Isotropic Gaussian blobs. Cluster `j` is centred at `(separation/√2)·e_j`,
/// so every pair of centres is `separation` apart. Point `i` belongs to
/// cluster `i mod k`.
pub fn blobs(n: usize, dims: usize, k: usize, sigma: f64, separation: f64, seed: u64) -> Result<Dataset> {
    if k == 0 || k > dims || n < k {
        return Err(SscError::InvalidArgument(format!(
            "blobs need 1 <= k <= dims and n >= k, got n={n} dims={dims} k={k}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite() && separation.is_finite()) {
        return Err(SscError::InvalidArgument("sigma and separation must be finite, sigma >= 0".into()));
    }
    let offset = separation / 2f64.sqrt();
    let mut g = SeededRng::new(seed).generator();
    let mut values = Vec::with_capacity(n * dims);
    let labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    for &c in &labels {
        for j in 0..dims {
            let centre = if j == c { offset } else { 0.0 };
            let z: f64 = g.sample(StandardNormal);
            values.push(centre + sigma * z);
        }
    }
    Dataset::new(DataMatrix::new(n, dims, values)?, Some(labels))
}

/// Two interleaving half circles in the plane with Gaussian jitter.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(SscError::InvalidArgument("two moons need n >= 2".into()));
    }
    let mut g = SeededRng::new(seed).generator();
    let mut values = Vec::with_capacity(2 * n);
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    for (i, &c) in labels.iter().enumerate() {
        let t = std::f64::consts::PI * (i / 2) as f64 / ((n / 2).max(2) - 1) as f64;
        let (x, y) = if c == 0 { (t.cos(), t.sin()) } else { (1.0 - t.cos(), 0.5 - t.sin()) };
        let (dx, dy): (f64, f64) = (g.sample(StandardNormal), g.sample(StandardNormal));
        values.push(x + noise * dx);
        values.push(y + noise * dy);
    }
    Dataset::new(DataMatrix::new(n, 2, values)?, Some(labels))
}
