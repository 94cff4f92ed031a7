//! Compressed-sparse-row storage for landmark affinities and their fusion.

use crate::error::{Result, SscError};

/// Largest column count for which [`spmm_gram`] will build a dense Gram matrix.
pub const GRAM_COLUMN_CAP: usize = 16_384;

/// CSR matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRowMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRowMatrix {
    /// Assemble from `(row, col, value)` triplets in any order.
    ///
    /// Duplicate coordinates are an error rather than being summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if cols > u32::MAX as usize {
            return Err(SscError::InvalidArgument(format!("{cols} columns exceeds u32 range")));
        }
        for &(i, j, v) in triplets {
            if i >= rows || j >= cols {
                return Err(SscError::IndexOutOfRange { row: i, col: j, rows, cols });
            }
            if !v.is_finite() {
                return Err(SscError::NonFinite(format!("triplet ({i}, {j}) = {v}")));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(SscError::DuplicateEntry { row: w[0].0, col: w[0].1 });
        }

        let mut row_offsets = vec![0usize; rows + 1];
        for &(i, _, _) in &sorted {
            row_offsets[i + 1] += 1;
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        let col_indices = sorted.iter().map(|&(_, j, _)| j as u32).collect();
        let values = sorted.iter().map(|&(_, _, v)| v).collect();
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    /// Wrap raw CSR arrays after checking every structural invariant.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(SscError::InvalidArgument(format!("invalid CSR: {msg}")));
        if row_offsets.len() != rows + 1 {
            return bad(format!("{} row offsets for {rows} rows", row_offsets.len()));
        }
        if row_offsets[0] != 0 || row_offsets[rows] != col_indices.len() {
            return bad("offsets must start at 0 and end at nnz".into());
        }
        if col_indices.len() != values.len() {
            return bad("index and value arrays differ in length".into());
        }
        for i in 0..rows {
            let (s, e) = (row_offsets[i], row_offsets[i + 1]);
            if s > e {
                return bad(format!("offsets decrease at row {i}"));
            }
            let idx = &col_indices[s..e];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("row {i} column indices not strictly increasing"));
            }
            if let Some(&j) = idx.last() {
                if j as usize >= cols {
                    return Err(SscError::IndexOutOfRange { row: i, col: j as usize, rows, cols });
                }
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SscError::NonFinite(format!("CSR value {v}")));
        }
        Ok(Self { rows, cols, row_offsets, col_indices, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn density(&self) -> f64 {
        self.nnz() as f64 / (self.rows as f64 * self.cols as f64)
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// Row-major triplet listing.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.rows)
            .flat_map(|i| {
                let (idx, val) = self.row(i);
                idx.iter().zip(val).map(move |(&j, &v)| (i, j as usize, v))
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (i, j, v) in self.triplets() {
            out[i * self.cols + j] = v;
        }
        out
    }

    /// `self * dense` where `dense` is `cols x k` row-major; result is `rows x k`.
    pub fn mul_dense(&self, dense: &[f64], k: usize) -> Result<Vec<f64>> {
        if dense.len() != self.cols * k {
            return Err(SscError::DimensionMismatch(format!(
                "right operand has {} values, expected {}x{k}",
                dense.len(),
                self.cols
            )));
        }
        let mut out = vec![0.0; self.rows * k];
        for (i, out_row) in out.chunks_exact_mut(k.max(1)).enumerate().take(self.rows) {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                let src = &dense[j as usize * k..(j as usize + 1) * k];
                for (o, s) in out_row.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
        Ok(out)
    }

    /// Bytes held by the three CSR arrays (8-byte values, 4-byte column
    /// indices, 8-byte row offsets).
    pub fn footprint_bytes(&self) -> usize {
        csr_footprint_bytes(self.rows, self.nnz())
    }
}

/// Storage cost of a CSR matrix with `rows` rows and `nnz` stored entries.
pub fn csr_footprint_bytes(rows: usize, nnz: usize) -> usize {
    nnz * (std::mem::size_of::<f64>() + std::mem::size_of::<u32>())
        + (rows + 1) * std::mem::size_of::<usize>()
}

/// Dense `ZᵀZ` (`cols x cols`, row-major), capped at [`GRAM_COLUMN_CAP`] columns.
pub fn spmm_gram(z: &SparseRowMatrix) -> Result<Vec<f64>> {
    spmm_gram_with_cap(z, GRAM_COLUMN_CAP)
}

pub fn spmm_gram_with_cap(z: &SparseRowMatrix, cap: usize) -> Result<Vec<f64>> {
    let c = z.cols();
    if c > cap {
        return Err(SscError::ColumnCapExceeded { cols: c, cap });
    }
    let mut g = vec![0.0f64; c * c];
    // Upper triangle only, accumulated in row order, then mirrored.
    for i in 0..z.rows() {
        let (idx, val) = z.row(i);
        for (a, (&ja, &va)) in idx.iter().zip(val).enumerate() {
            let base = ja as usize * c;
            for (&jb, &vb) in idx[a..].iter().zip(&val[a..]) {
                g[base + jb as usize] += va * vb;
            }
        }
    }
    for a in 0..c {
        for b in (a + 1)..c {
            g[b * c + a] = g[a * c + b];
        }
    }
    Ok(g)
}
