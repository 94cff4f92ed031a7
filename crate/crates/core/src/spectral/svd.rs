use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, SscError};
use crate::tensor::{spmm_gram, DataMatrix, SparseRowMatrix};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Top-`k` left singular vectors of a fused affinity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// `n x k`, orthonormal columns.
    pub u: DataMatrix,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
}

impl SpectralEmbedding {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    /// Copy with every row scaled to unit length; zero rows are left as is.
    pub fn row_normalized(&self) -> Result<DataMatrix> {
        let k = self.u.cols();
        let mut v = self.u.as_slice().to_vec();
        for row in v.chunks_exact_mut(k) {
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        DataMatrix::new(self.u.rows(), k, v)
    }
}

/// Left singular vectors through the `cols x cols` Gram matrix: eigenpairs
/// `(λ, v)` of `ZᵀZ` give `σ = sqrt(λ)` and `u = Z v / σ`. Each column's sign is
/// fixed so that its largest-magnitude entry is positive.
pub fn left_singular_vectors(z: &SparseRowMatrix, k: usize) -> Result<SpectralEmbedding> {
    let (n, c) = (z.rows(), z.cols());
    if k == 0 || k > n.min(c) {
        return Err(SscError::InvalidArgument(format!(
            "k = {k} must be in 1..={} for a {n}x{c} matrix",
            n.min(c)
        )));
    }
    let gram = spmm_gram(z)?;
    let eig = SymmetricEigen::new(DMatrix::from_row_slice(c, c, &gram));

    let mut order: Vec<usize> = (0..c).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let sigma: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let found = sigma.iter().take_while(|&&s| s > RANK_TOLERANCE * sigma[0] && s > 0.0).count();
    if found < k {
        return Err(SscError::RankDeficient { found, wanted: k });
    }

    let mut v = vec![0.0; c * k];
    for (col, &i) in order.iter().take(k).enumerate() {
        for row in 0..c {
            v[row * k + col] = eig.eigenvectors[(row, i)];
        }
    }
    let mut u = z.mul_dense(&v, k)?;
    for col in 0..k {
        let s = sigma[col];
        let mut pivot = 0.0f64;
        for row in 0..n {
            let x = u[row * k + col];
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let scale = if pivot < 0.0 { -1.0 / s } else { 1.0 / s };
        for row in 0..n {
            u[row * k + col] *= scale;
        }
    }
    Ok(SpectralEmbedding { u: DataMatrix::new(n, k, u)?, singular_values: sigma[..k].to_vec() })
}
