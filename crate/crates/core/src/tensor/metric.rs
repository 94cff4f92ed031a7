use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SscError};

pub const DEFAULT_MINKOWSKI_Q: f64 = 3.0;

/// Distance used when measuring point-to-landmark proximity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    /// `1 - cos(a, b)`; zero-norm inputs are rejected.
    Cosine,
    Minkowski { q: f64 },
}

impl MetricKind {
    pub fn minkowski(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(MetricKind::Minkowski { q })
        } else {
            Err(SscError::InvalidArgument(format!(
                "minkowski exponent must be finite and > 0, got {q}"
            )))
        }
    }

    /// Metrics whose distance scales linearly with a positive rescaling of the inputs.
    pub fn is_homogeneous(&self) -> bool {
        !matches!(self, MetricKind::Cosine)
    }
}

impl Default for MetricKind {
    fn default() -> Self {
        MetricKind::Euclidean
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Euclidean => f.write_str("euclidean"),
            MetricKind::Cosine => f.write_str("cosine"),
            MetricKind::Minkowski { q } if *q == DEFAULT_MINKOWSKI_Q => f.write_str("minkowski"),
            MetricKind::Minkowski { q } => write!(f, "minkowski:{q}"),
        }
    }
}

impl FromStr for MetricKind {
    type Err = SscError;

    /// Accepts `euclidean`, `cosine`, `minkowski` (q = 3) and `minkowski:<q>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "euclidean" => Ok(MetricKind::Euclidean),
            "cosine" => Ok(MetricKind::Cosine),
            "minkowski" => Ok(MetricKind::Minkowski {
                q: DEFAULT_MINKOWSKI_Q,
            }),
            other => match other.strip_prefix("minkowski:") {
                Some(q) => {
                    let q: f64 = q.parse().map_err(|_| {
                        SscError::Config(format!("bad minkowski exponent in `{other}`"))
                    })?;
                    MetricKind::minkowski(q).map_err(|e| SscError::Config(e.to_string()))
                }
                None => Err(SscError::Config(format!("unknown metric `{other}`"))),
            },
        }
    }
}

/// Distance between `a` and `b` under `metric`.
pub fn distance(a: &[f64], b: &[f64], metric: MetricKind) -> Result<f64> {
    if a.len() != b.len() {
        return Err(SscError::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    match metric {
        MetricKind::Euclidean => Ok(squared_euclidean(a, b).sqrt()),
        MetricKind::Cosine => {
            let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                dot += x * y;
                na += x * x;
                nb += y * y;
            }
            if na == 0.0 || nb == 0.0 {
                return Err(SscError::ZeroNorm);
            }
            let cos = (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0);
            Ok((1.0 - cos).max(0.0))
        }
        MetricKind::Minkowski { q } => {
            let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(q)).sum();
            Ok(s.powf(1.0 / q))
        }
    }
}

#[inline]
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        let e = distance(&[0.0, 0.0], &[3.0, 4.0], MetricKind::Euclidean).unwrap();
        assert_eq!(e, 5.0);
        let c = distance(&[1.0, 0.0], &[0.0, 1.0], MetricKind::Cosine).unwrap();
        assert_eq!(c, 1.0);
        let m = distance(&[1.0, 2.0, 3.0], &[4.0, 6.0, 8.0], MetricKind::minkowski(3.0).unwrap())
            .unwrap();
        assert!((m - 6.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            distance(&[1.0], &[1.0, 2.0], MetricKind::Euclidean),
            Err(SscError::DimensionMismatch(_))
        ));
        assert!(matches!(
            distance(&[0.0, 0.0], &[1.0, 2.0], MetricKind::Cosine),
            Err(SscError::ZeroNorm)
        ));
        assert!(MetricKind::minkowski(0.0).is_err());
    }

    #[test]
    fn parse_and_display() {
        for s in ["euclidean", "cosine", "minkowski", "minkowski:4"] {
            let m: MetricKind = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert_eq!(
            "minkowski".parse::<MetricKind>().unwrap(),
            MetricKind::Minkowski { q: 3.0 }
        );
        assert!("manhattan".parse::<MetricKind>().is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0..10.0f64, 3)
    }

    fn metrics() -> impl Strategy<Value = MetricKind> {
        prop_oneof![
            Just(MetricKind::Euclidean),
            Just(MetricKind::Cosine),
            (1.0..6.0f64).prop_map(|q| MetricKind::Minkowski { q }),
        ]
    }

    proptest! {
        #[test]
        fn symmetric_and_zero_on_diagonal(a in vec3(), b in vec3(), m in metrics()) {
            prop_assume!(a.iter().any(|v| v.abs() > 1e-6) && b.iter().any(|v| v.abs() > 1e-6));
            let ab = distance(&a, &b, m).unwrap();
            let ba = distance(&b, &a, m).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab));
            prop_assert!(distance(&a, &a, m).unwrap() <= 1e-12);
        }

        #[test]
        fn triangle_inequality(a in vec3(), b in vec3(), c in vec3(), q in 1.0..6.0f64) {
            for m in [MetricKind::Euclidean, MetricKind::Minkowski { q }] {
                let ac = distance(&a, &c, m).unwrap();
                let ab = distance(&a, &b, m).unwrap();
                let bc = distance(&b, &c, m).unwrap();
                prop_assert!(ac <= ab + bc + 1e-9);
            }
        }
    }
}
