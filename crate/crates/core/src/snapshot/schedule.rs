use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};

/// Cyclic cosine learning-rate schedule with `cycles` warm restarts over
/// `total_steps` steps (epochs, or mini-batch iterations when stepping per batch).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSchedule {
    alpha0: f64,
    total_steps: usize,
    cycles: usize,
}

impl SnapshotSchedule {
    pub fn new(alpha0: f64, total_steps: usize, cycles: usize) -> Result<Self> {
        if !(alpha0.is_finite() && alpha0 > 0.0) {
            return Err(SscError::InvalidArgument(format!("alpha0 must be > 0, got {alpha0}")));
        }
        if cycles == 0 || total_steps < cycles {
            return Err(SscError::InvalidArgument(format!(
                "need 1 <= cycles <= total steps, got cycles={cycles}, total={total_steps}"
            )));
        }
        Ok(Self { alpha0, total_steps, cycles })
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn cycles(&self) -> usize {
        self.cycles
    }

    /// `ceil(T / M)`.
    pub fn cycle_length(&self) -> usize {
        self.total_steps.div_ceil(self.cycles)
    }

    /// Steps (1-based) at which the snapshot of each cycle is taken. The last
    /// cycle is truncated to `T` when `M` does not divide `T`.
    pub fn snapshot_steps(&self) -> Vec<usize> {
        let l = self.cycle_length();
        (1..=self.cycles).map(|c| (c * l).min(self.total_steps)).collect()
    }
}

/// Learning rate at step `t` (1-based):
/// `alpha0 / 2 * (cos(pi * ((t - 1) mod L) / L) + 1)` with `L = ceil(T / M)`.
pub fn cosine_lr(t: usize, schedule: &SnapshotSchedule) -> Result<f64> {
    if t == 0 || t > schedule.total_steps {
        return Err(SscError::InvalidArgument(format!(
            "step {t} outside 1..={}",
            schedule.total_steps
        )));
    }
    let l = schedule.cycle_length();
    let phase = ((t - 1) % l) as f64 / l as f64;
    Ok(schedule.alpha0 / 2.0 * ((PI * phase).cos() + 1.0))
}
