use crate::error::{Result, SscError};
use crate::tensor::DataMatrix;

/// Scott-rule kernel bandwidth `s̄ · n^(-1/(d'+4))`, where `s̄` is the mean of
/// the per-dimension sample standard deviations (`n - 1` denominator).
pub fn scott_bandwidth(y: &DataMatrix) -> Result<f64> {
    let (n, d) = y.shape();
    if n < 2 {
        return Err(SscError::InvalidArgument("bandwidth needs at least 2 rows".into()));
    }
    let mut mean = vec![0.0; d];
    for row in y.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; d];
    for row in y.iter_rows() {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let mean_std = var.iter().map(|s| (s / (n - 1) as f64).sqrt()).sum::<f64>() / d as f64;
    if mean_std <= 0.0 {
        return Err(SscError::InvalidArgument(
            "zero variance in every dimension; bandwidth undefined".into(),
        ));
    }
    Ok(mean_std * (n as f64).powf(-1.0 / (d as f64 + 4.0)))
}
