use serde::{Deserialize, Serialize};

/// Scores of one repeat. Metric fields are `None` when no ground truth was given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub repeat: usize,
    pub seed: u64,
    pub inertia: f64,
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub acc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub nmi: f64,
    pub ari: f64,
    pub acc: f64,
}

/// Aggregate over repeats. `nmi`, `ari` and `acc` are the means; `std` is the
/// sample standard deviation (zero for a single repeat).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub nmi: Option<f64>,
    pub ari: Option<f64>,
    pub acc: Option<f64>,
    pub runs: Vec<RunEntry>,
    pub mean: Option<MetricSummary>,
    pub std: Option<MetricSummary>,
    pub repeats: usize,
    /// NMI normalization: geometric mean of the two entropies.
    pub nmi_variant: String,
    pub config_fingerprint: String,
}

impl EvaluationReport {
    pub fn from_runs(runs: Vec<RunEntry>, config_fingerprint: String) -> Self {
        let scored: Vec<MetricSummary> = runs
            .iter()
            .filter_map(|r| Some(MetricSummary { nmi: r.nmi?, ari: r.ari?, acc: r.acc? }))
            .collect();
        let (mean, std) = if scored.is_empty() || scored.len() != runs.len() {
            (None, None)
        } else {
            let pick = |f: fn(&MetricSummary) -> f64| -> (f64, f64) {
                let v: Vec<f64> = scored.iter().map(f).collect();
                mean_and_sample_std(&v)
            };
            let (nm, ns) = pick(|s| s.nmi);
            let (am, as_) = pick(|s| s.ari);
            let (cm, cs) = pick(|s| s.acc);
            (
                Some(MetricSummary { nmi: nm, ari: am, acc: cm }),
                Some(MetricSummary { nmi: ns, ari: as_, acc: cs }),
            )
        };
        Self {
            nmi: mean.map(|m| m.nmi),
            ari: mean.map(|m| m.ari),
            acc: mean.map(|m| m.acc),
            repeats: runs.len(),
            runs,
            mean,
            std,
            nmi_variant: "sqrt".to_string(),
            config_fingerprint,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

pub fn mean_and_sample_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
