//! Memory accounting for the `info` report.

use serde::Serialize;

use crate::tensor::csr_footprint_bytes;

pub const MIB: f64 = 1024.0 * 1024.0;
pub const GIB: f64 = MIB * 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Footprint {
    pub n: usize,
    pub landmarks: usize,
    pub sparsity: usize,
    pub members: usize,
    /// CSR bytes of one member affinity.
    pub member_bytes: usize,
    /// CSR bytes of all members together.
    pub ensemble_bytes: usize,
    /// An `n x n` affinity of 8-byte floats.
    pub dense_bytes: u128,
}

impl Footprint {
    pub fn new(n: usize, landmarks: usize, sparsity: usize, members: usize) -> Self {
        let member_bytes = csr_footprint_bytes(n, n * sparsity);
        Self {
            n,
            landmarks,
            sparsity,
            members,
            member_bytes,
            ensemble_bytes: member_bytes * members,
            dense_bytes: (n as u128) * (n as u128) * 8,
        }
    }

    pub fn density(&self) -> f64 {
        self.sparsity as f64 / self.landmarks as f64
    }

    pub fn render(&self) -> String {
        format!(
            "n = {}, p = {}, r = {}, m = {}\n\
             member affinity: {} bytes ({:.2} MiB), density {:.3}%\n\
             all members: {} bytes ({:.2} MiB)\n\
             dense n x n f64: {} bytes ({:.2} GiB)\n",
            self.n,
            self.landmarks,
            self.sparsity,
            self.members,
            self.member_bytes,
            self.member_bytes as f64 / MIB,
            100.0 * self.density(),
            self.ensemble_bytes,
            self.ensemble_bytes as f64 / MIB,
            self.dense_bytes,
            self.dense_bytes as f64 / GIB,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_counted_bytes() {
        let f = Footprint::new(4, 3, 2, 2);
        // 8 entries * 12 bytes + 5 offsets * 8 bytes
        assert_eq!(f.member_bytes, 136);
        assert_eq!(f.ensemble_bytes, 272);
        assert_eq!(f.dense_bytes, 128);
    }
}
