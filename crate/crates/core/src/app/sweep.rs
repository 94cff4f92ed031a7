//! One-at-a-time hyperparameter sweeps.

use std::fmt::Write as _;

use super::config::PipelineConfig;
use super::dataset::Dataset;
use super::pipeline::{run_model, Model, RunRecord};
use crate::error::{Result, SscError};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: String,
    pub record: RunRecord,
}

/// Run `model` once per value of `key`, every other field fixed at `template`.
pub fn sweep(
    template: &PipelineConfig,
    model: Model,
    key: &str,
    values: &[String],
    data: &Dataset,
) -> Result<Vec<SweepPoint>> {
    if !PipelineConfig::is_key(key) {
        return Err(SscError::Config(format!("unknown sweep field `{key}`")));
    }
    let configs = values
        .iter()
        .map(|v| {
            let mut c = template.clone();
            c.set(key, v)?;
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    values
        .iter()
        .zip(&configs)
        .map(|(v, c)| Ok(SweepPoint { value: v.clone(), record: run_model(model, c, data)?.record }))
        .collect()
}

/// Fraction of consecutive points whose mean NMI does not decrease. `None`
/// with fewer than two scored points.
pub fn nondecreasing_fraction(points: &[SweepPoint]) -> Option<f64> {
    let means: Vec<f64> = points.iter().filter_map(|p| p.record.report.nmi).collect();
    if means.len() < 2 || means.len() != points.len() {
        return None;
    }
    let up = means.windows(2).filter(|w| w[1] >= w[0]).count();
    Some(up as f64 / (means.len() - 1) as f64)
}

/// `value  mean NMI ± std` table followed by the trend statistic.
pub fn sweep_table(key: &str, points: &[SweepPoint]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{key:>12}  {:>8}  {:>8}", "nmi", "std");
    for p in points {
        let r = &p.record.report;
        match (r.nmi, r.std) {
            (Some(m), Some(sd)) => {
                let _ = writeln!(s, "{:>12}  {m:>8.4}  {:>8.4}", p.value, sd.nmi);
            }
            _ => {
                let _ = writeln!(s, "{:>12}  {:>8}  {:>8}", p.value, "-", "-");
            }
        }
    }
    if let Some(f) = nondecreasing_fraction(points) {
        let _ = writeln!(s, "nondecreasing steps: {:.0}%", 100.0 * f);
    }
    s
}
