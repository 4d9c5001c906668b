//! Monte Carlo BLER of the full DCI chain over a SINR grid.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::qpsk::{qpsk_soft_demod, qpsk_soft_demod_faded};
use super::{decode_dci, encode_dci, RateMatcher};
use crate::control::{AggregationLevel, DCI_PAYLOAD_BITS};
use crate::rng::{self, complex_normal, tag};
use crate::units::db_to_linear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Awgn,
    /// Flat Rayleigh fading, one independent gain per QPSK symbol, known at
    /// the receiver.
    RayleighFlat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkChainConfig {
    pub al: AggregationLevel,
    pub channel: ChannelKind,
    pub trials: usize,
    pub sinr_grid: Vec<f64>,
    pub seed: u64,
}

impl LinkChainConfig {
    /// AWGN sweep from `lo` to `hi` dB in `step` increments.
    pub fn awgn(
        al: AggregationLevel,
        lo: f64,
        hi: f64,
        step: f64,
        trials: usize,
        seed: u64,
    ) -> Self {
        let n = ((hi - lo) / step).round() as usize;
        Self {
            al,
            channel: ChannelKind::Awgn,
            trials,
            sinr_grid: (0..=n).map(|i| lo + step * i as f64).collect(),
            seed,
        }
    }
}

/// Measured BLER per SINR point for one aggregation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlerCurve {
    pub al: AggregationLevel,
    /// `(sinr_db, bler)`, ascending in SINR.
    pub points: Vec<(f64, f64)>,
    pub trials_per_point: usize,
}

impl BlerCurve {
    /// Non-increasing fit by pool-adjacent-violators (equal weights).
    pub fn regularized(&self) -> BlerCurve {
        let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(self.points.len());
        for &(_, b) in &self.points {
            blocks.push((b, 1));
            while blocks.len() >= 2 {
                let (last, n_last) = blocks[blocks.len() - 1];
                let (prev, n_prev) = blocks[blocks.len() - 2];
                if prev >= last {
                    break;
                }
                blocks.pop();
                let merged =
                    (prev * n_prev as f64 + last * n_last as f64) / (n_prev + n_last) as f64;
                *blocks.last_mut().unwrap() = (merged, n_prev + n_last);
            }
        }
        let values = blocks.iter().flat_map(|&(v, n)| std::iter::repeat_n(v, n));
        BlerCurve {
            al: self.al,
            points: self
                .points
                .iter()
                .zip(values)
                .map(|(&(s, _), v)| (s, v))
                .collect(),
            trials_per_point: self.trials_per_point,
        }
    }
}

/// Outcome of pushing one random DCI through the chain.
fn run_trial<R: Rng>(
    rng: &mut R,
    matcher: &RateMatcher,
    al: AggregationLevel,
    channel: ChannelKind,
    noise_var: f64,
) -> bool {
    let payload: Vec<u8> = (0..DCI_PAYLOAD_BITS)
        .map(|_| rng.random_range(0..2u8))
        .collect();
    let symbols = encode_dci(matcher, &payload, al).expect("payload length is fixed");
    let llr = match channel {
        ChannelKind::Awgn => {
            let rx: Vec<Complex64> = symbols
                .iter()
                .map(|s| s + complex_normal(rng, noise_var))
                .collect();
            qpsk_soft_demod(&rx, noise_var)
        }
        ChannelKind::RayleighFlat => {
            let gains: Vec<Complex64> = (0..symbols.len())
                .map(|_| complex_normal(rng, 1.0))
                .collect();
            let rx: Vec<Complex64> = symbols
                .iter()
                .zip(&gains)
                .map(|(s, h)| h * s + complex_normal(rng, noise_var))
                .collect();
            qpsk_soft_demod_faded(&rx, &gains, noise_var)
        }
    };
    decode_dci(matcher, &llr).is_none_or(|p| p != payload)
}

/// Run the chain `cfg.trials` times per SINR point. Every trial draws from
/// its own stream keyed by `(seed, al, point, trial)`, so the result does
/// not depend on the rayon pool size.
pub fn simulate_bler(cfg: &LinkChainConfig) -> BlerCurve {
    let matcher = RateMatcher::default();
    let trials = cfg.trials.max(1);
    let points = cfg
        .sinr_grid
        .iter()
        .enumerate()
        .map(|(pi, &sinr_db)| {
            let noise_var = 1.0 / db_to_linear(sinr_db);
            let errors: usize = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut r = rng::stream(
                        cfg.seed,
                        &[tag::BLER, cfg.al.cces() as u64, pi as u64, t as u64],
                    );
                    run_trial(&mut r, &matcher, cfg.al, cfg.channel, noise_var) as usize
                })
                .sum();
            (sinr_db, errors as f64 / trials as f64)
        })
        .collect();
    BlerCurve {
        al: cfg.al,
        points,
        trials_per_point: trials,
    }
}

/// BLER curves for every aggregation level on a shared grid.
pub fn simulate_all(
    grid: &[f64],
    channel: ChannelKind,
    trials: usize,
    seed: u64,
) -> Vec<BlerCurve> {
    AggregationLevel::ALL
        .iter()
        .map(|&al| {
            simulate_bler(&LinkChainConfig {
                al,
                channel,
                trials,
                sinr_grid: grid.to_vec(),
                seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_free_at_high_sinr() {
        for al in AggregationLevel::ALL {
            let curve = simulate_bler(&LinkChainConfig {
                al,
                channel: ChannelKind::Awgn,
                trials: 2_500,
                sinr_grid: vec![40.0],
                seed: 1,
            });
            assert_eq!(curve.points[0].1, 0.0, "{al:?}");
        }
    }

    #[test]
    fn regularization_is_monotone() {
        let c = BlerCurve {
            al: AggregationLevel::L1,
            points: vec![
                (0.0, 0.5),
                (1.0, 0.2),
                (2.0, 0.25),
                (3.0, 0.01),
                (4.0, 0.02),
            ],
            trials_per_point: 100,
        };
        let r = c.regularized();
        assert!(r.points.windows(2).all(|w| w[0].1 >= w[1].1));
        assert!((r.points[1].1 - 0.225).abs() < 1e-12);
        assert!((r.points[3].1 - 0.015).abs() < 1e-12);
    }

    #[test]
    fn reproducible() {
        let cfg = LinkChainConfig::awgn(AggregationLevel::L1, 0.0, 2.0, 1.0, 200, 3);
        assert_eq!(simulate_bler(&cfg), simulate_bler(&cfg));
    }
}
