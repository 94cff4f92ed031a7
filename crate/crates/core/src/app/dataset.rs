//! Loading feature matrices and label vectors from disk.
//!
//! Supported feature formats:
//! - `idx`: big-endian IDX image file (magic 2051, unsigned bytes), scaled by 1/255.
//! - `csv`: one row per line, comma separated numbers, no header.
//! - `rawf32`: `SSCD`, then `u32` rows and `u32` cols, then little-endian `f32` values.
//!
//! Labels are either IDX (magic 2049) or text with one integer per line.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, SscError};
use crate::tensor::DataMatrix;

pub const RAW_MAGIC: &[u8; 4] = b"SSCD";
const IDX_IMAGES: u32 = 2051;
const IDX_LABELS: u32 = 2049;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Idx,
    Csv,
    RawF32,
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Idx => "idx",
            DataFormat::Csv => "csv",
            DataFormat::RawF32 => "rawf32",
        })
    }
}

impl FromStr for DataFormat {
    type Err = SscError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "idx" => Ok(DataFormat::Idx),
            "csv" => Ok(DataFormat::Csv),
            "rawf32" | "raw" => Ok(DataFormat::RawF32),
            other => Err(SscError::Config(format!("unknown data format `{other}`"))),
        }
    }
}

/// Features plus optional ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DataMatrix,
    pub labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(x: DataMatrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != x.rows() {
                return Err(SscError::Data(format!(
                    "{} labels for {} rows",
                    l.len(),
                    x.rows()
                )));
            }
        }
        Ok(Self { x, labels })
    }

    pub fn load(path: &Path, format: DataFormat, labels: Option<&Path>) -> Result<Self> {
        let x = load_dataset(path, format)?;
        let labels = labels.map(load_labels).transpose()?;
        Self::new(x, labels)
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| SscError::Data(format!("cannot read {}: {e}", path.display())))
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<DataMatrix> {
    let bytes = read(path)?;
    let x = match format {
        DataFormat::Idx => parse_idx_images(&bytes),
        DataFormat::Csv => parse_csv(&String::from_utf8_lossy(&bytes)),
        DataFormat::RawF32 => parse_raw(&bytes),
    };
    x.map_err(|e| match e {
        SscError::Data(m) => SscError::Data(format!("{}: {m}", path.display())),
        other => SscError::Data(format!("{}: {other}", path.display())),
    })
}

/// Labels from an IDX label file, or text with one integer per line.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let bytes = read(path)?;
    let parsed = if bytes.len() >= 4 && be_u32(&bytes, 0) == Some(IDX_LABELS) {
        parse_idx_labels(&bytes)
    } else {
        parse_label_text(&String::from_utf8_lossy(&bytes))
    };
    parsed.map_err(|e| SscError::Data(format!("{}: {e}", path.display())))
}

fn be_u32(b: &[u8], at: usize) -> Option<u32> {
    b.get(at..at + 4).map(|s| u32::from_be_bytes(s.try_into().unwrap()))
}

fn truncated() -> SscError {
    SscError::Data("truncated file".into())
}

pub fn parse_idx_images(b: &[u8]) -> Result<DataMatrix> {
    let magic = be_u32(b, 0).ok_or_else(truncated)?;
    if magic != IDX_IMAGES {
        return Err(SscError::Data(format!("bad IDX image magic {magic}, expected {IDX_IMAGES}")));
    }
    let n = be_u32(b, 4).ok_or_else(truncated)? as usize;
    let h = be_u32(b, 8).ok_or_else(truncated)? as usize;
    let w = be_u32(b, 12).ok_or_else(truncated)? as usize;
    let d = h * w;
    let body = b.get(16..16 + n * d).ok_or_else(truncated)?;
    DataMatrix::new(n, d, body.iter().map(|&v| v as f64 / 255.0).collect())
}

pub fn parse_idx_labels(b: &[u8]) -> Result<Vec<usize>> {
    let magic = be_u32(b, 0).ok_or_else(truncated)?;
    if magic != IDX_LABELS {
        return Err(SscError::Data(format!("bad IDX label magic {magic}, expected {IDX_LABELS}")));
    }
    let n = be_u32(b, 4).ok_or_else(truncated)? as usize;
    let body = b.get(8..8 + n).ok_or_else(truncated)?;
    Ok(body.iter().map(|&v| v as usize).collect())
}

pub fn parse_csv(text: &str) -> Result<DataMatrix> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                SscError::Data(format!("line {}: non-numeric cell `{}`", lineno + 1, cell.trim()))
            })?;
            values.push(v);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(SscError::Data(format!(
                    "line {}: {width} columns, expected {c}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| SscError::Data("no rows".into()))?;
    DataMatrix::new(rows, cols, values)
}

pub fn parse_raw(b: &[u8]) -> Result<DataMatrix> {
    if b.len() < 4 || &b[..4] != RAW_MAGIC {
        return Err(SscError::Data("bad raw magic, expected SSCD".into()));
    }
    let le = |at: usize| -> Result<usize> {
        Ok(u32::from_le_bytes(b.get(at..at + 4).ok_or_else(truncated)?.try_into().unwrap()) as usize)
    };
    let (n, d) = (le(4)?, le(8)?);
    let body = b.get(12..12 + n * d * 4).ok_or_else(truncated)?;
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    DataMatrix::new(n, d, values)
}

pub fn parse_label_text(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| SscError::Data(format!("line {}: bad label `{}`", i + 1, l.trim())))
        })
        .collect()
}

pub fn write_raw<W: Write>(mut w: W, x: &DataMatrix) -> Result<()> {
    w.write_all(RAW_MAGIC)?;
    w.write_all(&(x.rows() as u32).to_le_bytes())?;
    w.write_all(&(x.cols() as u32).to_le_bytes())?;
    for &v in x.as_slice() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(mut w: W, x: &DataMatrix) -> Result<()> {
    for row in x.iter_rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn write_labels<W: Write>(mut w: W, labels: &[usize]) -> Result<()> {
    for l in labels {
        writeln!(w, "{l}")?;
    }
    Ok(())
}
