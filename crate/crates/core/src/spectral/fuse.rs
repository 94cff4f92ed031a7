use crate::error::{Result, SscError};
use crate::landmark::SparseAffinity;
use crate::tensor::SparseRowMatrix;

/// Column concatenation `[Ẑ₁ | … | Ẑ_m] / sqrt(m)` of member affinities.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedAffinity {
    pub matrix: SparseRowMatrix,
    pub m: usize,
    /// Column offset of every member block, plus the total column count.
    pub member_boundaries: Vec<usize>,
}

/// Fuse member affinities. Members may have different landmark counts.
pub fn fuse(members: &[SparseAffinity]) -> Result<FusedAffinity> {
    let first = members
        .first()
        .ok_or_else(|| SscError::InvalidArgument("fusion needs at least one member".into()))?;
    let n = first.matrix.rows();
    if let Some(i) = members.iter().position(|a| a.matrix.rows() != n) {
        return Err(SscError::DimensionMismatch(format!(
            "member {i} has {} rows, member 0 has {n}",
            members[i].matrix.rows()
        )));
    }
    let m = members.len();
    let mut member_boundaries = Vec::with_capacity(m + 1);
    member_boundaries.push(0);
    for a in members {
        member_boundaries.push(member_boundaries.last().unwrap() + a.matrix.cols());
    }
    let total_cols = *member_boundaries.last().unwrap();
    if total_cols > u32::MAX as usize {
        return Err(SscError::InvalidArgument(format!("{total_cols} fused columns exceeds u32 range")));
    }

    let scale = 1.0 / (m as f64).sqrt();
    let nnz: usize = members.iter().map(|a| a.matrix.nnz()).sum();
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    row_offsets.push(0);
    for i in 0..n {
        for (a, &offset) in members.iter().zip(&member_boundaries) {
            let (idx, val) = a.matrix.row(i);
            col_indices.extend(idx.iter().map(|&j| j + offset as u32));
            values.extend(val.iter().map(|&v| v * scale));
        }
        row_offsets.push(col_indices.len());
    }
    let matrix = SparseRowMatrix::from_parts(n, total_cols, row_offsets, col_indices, values)?;
    Ok(FusedAffinity { matrix, m, member_boundaries })
}
