//! SINR abstraction and the SINR-to-aggregation-level mapping.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::control::AggregationLevel;
use crate::link::estimation::crossing_db;
use crate::link::BlerCurve;

/// Target block error rate for the AL mapping.
pub const BLER_TARGET: f64 = 0.01;

/// Powers entering the abstracted SINR, all linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceProfile {
    pub signal_power: f64,
    /// Leak power from each other beam of the serving sector.
    pub alphas: Vec<f64>,
    pub noise_var: f64,
    /// Other-sector interference (0 when unused).
    pub external_interference: f64,
}

/// `S / (sigma^2 + I_wrap + 2 * sum(alpha_j))`. The leak counts twice: once
/// for the corrupted channel estimate and once on the data.
pub fn sinr_abs(p: &InterferenceProfile) -> f64 {
    let leak: f64 = p.alphas.iter().sum();
    p.signal_power / (p.noise_var + p.external_interference + 2.0 * leak)
}

/// Minimum SINR (dB) per aggregation level that meets the BLER target.
/// A missing entry means the level never reached the target on its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlThresholdTable {
    pub thresholds: BTreeMap<AggregationLevel, f64>,
    /// Identifies the BLER curve set the table came from.
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlDecision {
    Level(AggregationLevel),
    Outage,
}

impl AlDecision {
    pub fn level(self) -> Option<AggregationLevel> {
        match self {
            AlDecision::Level(al) => Some(al),
            AlDecision::Outage => None,
        }
    }
}

impl AlThresholdTable {
    pub fn new(thresholds: BTreeMap<AggregationLevel, f64>, source: impl Into<String>) -> Self {
        Self {
            thresholds,
            source: source.into(),
        }
    }

    pub fn threshold(&self, al: AggregationLevel) -> Option<f64> {
        self.thresholds.get(&al).copied()
    }

    pub fn is_complete(&self) -> bool {
        AggregationLevel::ALL
            .iter()
            .all(|al| self.thresholds.contains_key(al))
    }

    /// Thresholds fall strictly as the aggregation level grows.
    pub fn is_strictly_decreasing(&self) -> bool {
        let t: Vec<f64> = AggregationLevel::ALL
            .iter()
            .filter_map(|al| self.threshold(*al))
            .collect();
        t.len() == 4 && t.windows(2).all(|w| w[1] < w[0])
    }

    /// Smallest aggregation level whose threshold is at most `sinr_db`.
    pub fn sinr_to_al(&self, sinr_db: f64) -> AlDecision {
        AggregationLevel::ALL
            .into_iter()
            .find(|al| self.threshold(*al).is_some_and(|t| t <= sinr_db))
            .map_or(AlDecision::Outage, AlDecision::Level)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "al,threshold_db")?;
        for (al, t) in &self.thresholds {
            writeln!(out, "{al},{t:.4}")?;
        }
        Ok(())
    }
}

/// Per-curve threshold: first crossing of `target` on the regularized curve,
/// log-linear in BLER between grid points. A curve already at or below the
/// target at its first grid point gives that point.
pub fn curve_threshold(curve: &BlerCurve, target: f64) -> Option<f64> {
    let reg = curve.regularized();
    let first = *reg.points.first()?;
    if first.1 <= target {
        return Some(first.0);
    }
    crossing_db(&reg.points, target).or_else(|| {
        // crossing_db needs a strict drop below target
        reg.points.iter().find(|p| p.1 <= target).map(|p| p.0)
    })
}

pub fn build_threshold_table(curves: &[BlerCurve], target: f64, source: &str) -> AlThresholdTable {
    let thresholds = curves
        .iter()
        .filter_map(|c| curve_threshold(c, target).map(|t| (c.al, t)))
        .collect();
    AlThresholdTable::new(thresholds, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use AggregationLevel::*;

    fn table() -> AlThresholdTable {
        AlThresholdTable::new(
            BTreeMap::from([(L1, 2.0), (L2, -1.0), (L4, -4.0), (L8, -7.0)]),
            "test",
        )
    }

    #[test]
    fn sinr_abs_examples() {
        let base = InterferenceProfile {
            signal_power: 1.0,
            alphas: vec![],
            noise_var: 0.1,
            external_interference: 0.0,
        };
        assert!((sinr_abs(&base) - 10.0).abs() < 1e-12);
        let leaky = InterferenceProfile {
            alphas: vec![0.2],
            ..base.clone()
        };
        assert!((sinr_abs(&leaky) - 2.0).abs() < 1e-12);
        assert!(sinr_abs(&leaky) < sinr_abs(&base));
    }

    #[test]
    fn log_linear_threshold() {
        let c = BlerCurve {
            al: L1,
            points: vec![(-2.0, 0.02), (0.0, 0.005)],
            trials_per_point: 1000,
        };
        // log10 BER goes -1.699 -> -2.301; -2 is exactly halfway
        assert!((curve_threshold(&c, 0.01).unwrap() + 1.0).abs() < 1e-9);
        assert_eq!(curve_threshold(&c, 1.0), Some(-2.0));
        let never = BlerCurve {
            al: L1,
            points: vec![(-2.0, 0.5), (0.0, 0.2)],
            trials_per_point: 1000,
        };
        assert_eq!(curve_threshold(&never, 0.01), None);
        let t = build_threshold_table(&[c, never], 0.01, "x");
        assert!(!t.is_complete());
    }

    #[test]
    fn al_mapping() {
        let t = table();
        assert_eq!(t.sinr_to_al(30.0), AlDecision::Level(L1));
        assert_eq!(t.sinr_to_al(-4.0), AlDecision::Level(L4));
        assert_eq!(t.sinr_to_al(-7.5), AlDecision::Outage);
        assert!(t.is_strictly_decreasing());
    }

    proptest! {
        #[test]
        fn mapping_is_monotone(a in -20.0f64..20.0, b in -20.0f64..20.0) {
            let t = table();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let rank = |d: AlDecision| d.level().map_or(5, |al| al.index());
            prop_assert!(rank(t.sinr_to_al(hi)) <= rank(t.sinr_to_al(lo)));
        }

        #[test]
        fn sinr_is_scale_invariant(s in 1e-6f64..1e3, a in 0.0f64..10.0, n in 1e-6f64..10.0, i in 0.0f64..10.0, k in 1e-3f64..1e3) {
            let p = InterferenceProfile { signal_power: s, alphas: vec![a, a / 2.0], noise_var: n, external_interference: i };
            let q = InterferenceProfile { signal_power: s * k, alphas: vec![a * k, a * k / 2.0], noise_var: n * k, external_interference: i * k };
            prop_assert!((sinr_abs(&p) - sinr_abs(&q)).abs() <= 1e-9 * sinr_abs(&p));
        }

        #[test]
        fn no_interference_is_snr(s in 1e-6f64..1e3, n in 1e-6f64..10.0) {
            let p = InterferenceProfile { signal_power: s, alphas: vec![], noise_var: n, external_interference: 0.0 };
            prop_assert_eq!(sinr_abs(&p), s / n);
        }
    }
}
