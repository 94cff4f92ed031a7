//! Binary container shared by encoder snapshots (`SSCW`) and landmark sets (`SSCL`).
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      [u8; 4]
//! version    u16
//! blocks     u32
//! per block: rows u32, cols u32, rows*cols f64 (row-major), rows f64 (bias)
//! meta_len   u32
//! meta       meta_len bytes of UTF-8 JSON
//! ```

use std::io::{Read, Write};

use crate::error::{Result, SscError};

pub const FORMAT_VERSION: u16 = 1;
pub const SNAPSHOT_MAGIC: [u8; 4] = *b"SSCW";
pub const LANDMARK_MAGIC: [u8; 4] = *b"SSCL";

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    pub biases: Vec<f64>,
}

pub fn write_container<W: Write>(mut w: W, magic: [u8; 4], blocks: &[Block], meta: &str) -> Result<()> {
    w.write_all(&magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&to_u32(blocks.len())?.to_le_bytes())?;
    for b in blocks {
        if b.values.len() != b.rows * b.cols || b.biases.len() != b.rows {
            return Err(SscError::DimensionMismatch(format!(
                "block {}x{} holds {} values and {} biases",
                b.rows,
                b.cols,
                b.values.len(),
                b.biases.len()
            )));
        }
        w.write_all(&to_u32(b.rows)?.to_le_bytes())?;
        w.write_all(&to_u32(b.cols)?.to_le_bytes())?;
        for v in b.values.iter().chain(&b.biases) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.write_all(&to_u32(meta.len())?.to_le_bytes())?;
    w.write_all(meta.as_bytes())?;
    Ok(())
}

pub fn read_container<R: Read>(mut r: R, magic: [u8; 4]) -> Result<(Vec<Block>, String)> {
    let mut found = [0u8; 4];
    read_exact(&mut r, &mut found)?;
    if found != magic {
        return Err(SscError::Data(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&found),
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut v = [0u8; 2];
    read_exact(&mut r, &mut v)?;
    let version = u16::from_le_bytes(v);
    if version != FORMAT_VERSION {
        return Err(SscError::Data(format!("unsupported container version {version}")));
    }
    let count = read_u32(&mut r)? as usize;
    let mut blocks = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let rows = read_u32(&mut r)? as usize;
        let cols = read_u32(&mut r)? as usize;
        let values = read_f64s(&mut r, rows * cols)?;
        let biases = read_f64s(&mut r, rows)?;
        blocks.push(Block { rows, cols, values, biases });
    }
    let len = read_u32(&mut r)? as usize;
    let mut meta = vec![0u8; len];
    read_exact(&mut r, &mut meta)?;
    let meta = String::from_utf8(meta).map_err(|e| SscError::Data(format!("metadata is not UTF-8: {e}")))?;
    Ok((blocks, meta))
}

fn to_u32(x: usize) -> Result<u32> {
    u32::try_from(x).map_err(|_| SscError::InvalidArgument(format!("{x} does not fit in u32")))
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => SscError::Data("truncated file".into()),
        _ => SscError::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count.min(1 << 20));
    let mut b = [0u8; 8];
    for _ in 0..count {
        read_exact(r, &mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let block = Block { rows: 1, cols: 2, values: vec![1.0, 2.0], biases: vec![0.5] };
        let mut buf = Vec::new();
        write_container(&mut buf, SNAPSHOT_MAGIC, &[block.clone()], "{}").unwrap();
        assert_eq!(&buf[..4], b"SSCW");
        assert_eq!(&buf[4..6], &[1, 0]);
        assert_eq!(&buf[6..10], &[1, 0, 0, 0]);
        assert_eq!(&buf[10..14], &[1, 0, 0, 0]);
        assert_eq!(&buf[14..18], &[2, 0, 0, 0]);
        assert_eq!(&buf[18..26], &1.0f64.to_le_bytes());
        assert_eq!(buf.len(), 18 + 3 * 8 + 4 + 2);
        let (blocks, meta) = read_container(buf.as_slice(), SNAPSHOT_MAGIC).unwrap();
        assert_eq!(blocks, vec![block]);
        assert_eq!(meta, "{}");
    }

    #[test]
    fn rejects_wrong_magic_and_truncation() {
        let mut buf = Vec::new();
        write_container(&mut buf, LANDMARK_MAGIC, &[], "{}").unwrap();
        assert!(matches!(read_container(buf.as_slice(), SNAPSHOT_MAGIC), Err(SscError::Data(_))));
        assert!(matches!(
            read_container(&buf[..buf.len() - 1], LANDMARK_MAGIC),
            Err(SscError::Data(_))
        ));
    }
}
