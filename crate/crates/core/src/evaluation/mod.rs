//! External clustering quality: NMI, adjusted Rand index and best-matching accuracy.

mod report;

pub use report::{EvaluationReport, MetricSummary, RunEntry};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Result, SscError};

/// Largest number of non-empty clusters on either side accepted by
/// [`accuracy_hungarian`].
pub const MATCHING_CAP: usize = 64;

/// `counts[i][j]` = number of points with predicted label `i` and true label `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl ContingencyTable {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if counts.is_empty() || cols == 0 || counts.iter().any(|r| r.len() != cols) {
            return Err(SscError::InvalidArgument("contingency table must be a non-empty rectangle".into()));
        }
        let n = counts.iter().flatten().sum();
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<u64> {
        let mut s = vec![0; self.counts[0].len()];
        for r in &self.counts {
            for (a, &c) in s.iter_mut().zip(r) {
                *a += c;
            }
        }
        s
    }

    /// Same table with predicted and true roles swapped.
    pub fn transposed(&self) -> Self {
        let (rows, cols) = (self.counts.len(), self.counts[0].len());
        let counts = (0..cols).map(|j| (0..rows).map(|i| self.counts[i][j]).collect()).collect();
        Self { counts, n: self.n }
    }
}

/// Cross-tabulate predicted against true labels.
pub fn contingency(pred: &[usize], truth: &[usize]) -> Result<ContingencyTable> {
    if pred.len() != truth.len() {
        return Err(SscError::DimensionMismatch(format!(
            "{} predicted labels vs {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(SscError::InvalidArgument("no labels to compare".into()));
    }
    let kp = pred.iter().max().unwrap() + 1;
    let kt = truth.iter().max().unwrap() + 1;
    let mut counts = vec![vec![0u64; kt]; kp];
    for (&p, &t) in pred.iter().zip(truth) {
        counts[p][t] += 1;
    }
    ContingencyTable::from_counts(counts)
}

fn entropy(marginal: &[u64], n: f64) -> f64 {
    marginal
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I / sqrt(H_pred · H_true)`; zero when
/// either partition has a single cluster.
pub fn nmi(table: &ContingencyTable) -> Result<f64> {
    if table.n == 0 {
        return Err(SscError::InvalidArgument("empty contingency table".into()));
    }
    let n = table.n as f64;
    let (rows, cols) = (table.row_sums(), table.col_sums());
    let (hp, ht) = (entropy(&rows, n), entropy(&cols, n));
    if hp <= 0.0 || ht <= 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (hp * ht).sqrt()).clamp(0.0, 1.0))
}

fn pairs(x: u64) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index from pair counts. Returns 1 when the index is
/// degenerate (both partitions trivially agree on every pair).
pub fn ari(table: &ContingencyTable) -> Result<f64> {
    if table.n < 2 {
        return Err(SscError::InvalidArgument("adjusted Rand index needs at least 2 points".into()));
    }
    let index: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let a: f64 = table.row_sums().into_iter().map(pairs).sum();
    let b: f64 = table.col_sums().into_iter().map(pairs).sum();
    let total = pairs(table.n);
    let expected = a * b / total;
    let max = (a + b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Fraction of points on the diagonal under the best one-to-one matching of
/// predicted to true labels (Kuhn-Munkres on the zero-padded square table).
pub fn accuracy_hungarian(table: &ContingencyTable) -> Result<f64> {
    let rows: Vec<usize> = (0..table.counts.len())
        .filter(|&i| table.counts[i].iter().any(|&c| c > 0))
        .collect();
    let cols: Vec<usize> = (0..table.counts[0].len())
        .filter(|&j| table.counts.iter().any(|r| r[j] > 0))
        .collect();
    if rows.len() > MATCHING_CAP || cols.len() > MATCHING_CAP {
        return Err(SscError::InvalidArgument(format!(
            "{}x{} table exceeds the {MATCHING_CAP}-cluster matching cap",
            rows.len(),
            cols.len()
        )));
    }
    if table.n == 0 {
        return Err(SscError::InvalidArgument("empty contingency table".into()));
    }
    let size = rows.len().max(cols.len());
    let mut weights = Matrix::new(size, size, 0i64);
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            weights[(a, b)] = table.counts[i][j] as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / table.n as f64)
}

/// All three scores for one predicted labelling.
pub fn score(pred: &[usize], truth: &[usize]) -> Result<(f64, f64, f64)> {
    let t = contingency(pred, truth)?;
    Ok((nmi(&t)?, ari(&t)?, accuracy_hungarian(&t)?))
}
