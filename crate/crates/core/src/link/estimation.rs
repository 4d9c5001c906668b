//! Uncoded QPSK BER over flat Rayleigh fading, comparing explicit
//! channel estimation under inter-beam leakage with its SINR abstraction.
//!
//! Estimation path: the user listens to beam `i` whose gain is `h_i`; the
//! other active beams leak with gains `h_j`, `E|h_j|^2 = alpha`. The shared
//! reference signal is sent on every beam, so the estimate is
//! `h_i + sum_j h_j`, while the data symbol of beam `i` is received with
//! independent data from every other beam on top. Equalizing with the
//! estimate corrupts both the channel and the data.
//!
//! Abstraction path: ideal channel knowledge, AWGN of variance
//! `sigma^2 + 2 * sum_j alpha_j`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{self, complex_normal, tag};
use crate::units::db_to_linear;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionExperiment {
    /// Leak power per interfering beam, relative to the desired beam's
    /// mean power.
    pub alphas: Vec<f64>,
    pub interfering_beams: usize,
    pub snr_grid: Vec<f64>,
    /// QPSK symbols per SNR point.
    pub symbols: usize,
    pub seed: u64,
}

impl Default for AbstractionExperiment {
    fn default() -> Self {
        Self {
            alphas: vec![0.0, 0.001, 0.002, 0.004, 0.008],
            interfering_beams: 1,
            snr_grid: (0..=35).map(|s| s as f64).collect(),
            symbols: 200_000,
            seed: 8,
        }
    }
}

/// BER of both paths at one `(alpha, snr)` point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPair {
    pub alpha: f64,
    pub snr_db: f64,
    pub ber_estimation: f64,
    pub ber_abstraction: f64,
    pub bits: usize,
}

fn random_symbol<R: Rng>(rng: &mut R) -> (u8, u8, Complex64) {
    let b0 = rng.random_range(0..2u8);
    let b1 = rng.random_range(0..2u8);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    (
        b0,
        b1,
        Complex64::new(a * (1.0 - 2.0 * b0 as f64), a * (1.0 - 2.0 * b1 as f64)),
    )
}

fn bit_errors(z: Complex64, b0: u8, b1: u8) -> usize {
    ((z.re < 0.0) as u8 != b0) as usize + ((z.im < 0.0) as u8 != b1) as usize
}

const CHUNK: usize = 4096;

fn simulate_point(exp: &AbstractionExperiment, ai: usize, si: usize) -> BerPair {
    let alpha = exp.alphas[ai];
    let snr_db = exp.snr_grid[si];
    let noise_var = 1.0 / db_to_linear(snr_db);
    let chunks = exp.symbols.div_ceil(CHUNK);
    let (est, abs) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(
                exp.seed,
                &[tag::ABSTRACTION, ai as u64, si as u64, c as u64],
            );
            let n = CHUNK.min(exp.symbols - c * CHUNK);
            let mut est = 0usize;
            let mut abs = 0usize;
            for _ in 0..n {
                let (b0, b1, x) = random_symbol(&mut r);
                let h = complex_normal(&mut r, 1.0);

                let mut pilot_leak = Complex64::new(0.0, 0.0);
                let mut data_leak = Complex64::new(0.0, 0.0);
                for _ in 0..exp.interfering_beams {
                    let g = complex_normal(&mut r, alpha);
                    let (_, _, other) = random_symbol(&mut r);
                    pilot_leak += g;
                    data_leak += g * other;
                }
                let y = h * x + data_leak + complex_normal(&mut r, noise_var);
                let estimate = h + pilot_leak;
                est += bit_errors(y / estimate, b0, b1);

                let impairment = noise_var + 2.0 * alpha * exp.interfering_beams as f64;
                let y_abs = h * x + complex_normal(&mut r, impairment);
                abs += bit_errors(y_abs / h, b0, b1);
            }
            (est, abs)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let bits = 2 * exp.symbols;
    BerPair {
        alpha,
        snr_db,
        ber_estimation: est as f64 / bits as f64,
        ber_abstraction: abs as f64 / bits as f64,
        bits,
    }
}

/// Both BER curves for every alpha level, alpha-major then SNR.
pub fn estimation_vs_abstraction(exp: &AbstractionExperiment) -> Vec<BerPair> {
    (0..exp.alphas.len())
        .flat_map(|ai| (0..exp.snr_grid.len()).map(move |si| (ai, si)))
        .map(|(ai, si)| simulate_point(exp, ai, si))
        .collect()
}

/// SNR at which a falling curve first crosses `target`, interpolated
/// linearly in log10(BER). `None` if it never gets there.
pub fn crossing_db(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let lt = target.log10();
    points.windows(2).find_map(|w| {
        let (s0, b0) = w[0];
        let (s1, b1) = w[1];
        if b0 >= target && b1 < target {
            if b1 <= 0.0 {
                return Some(s1);
            }
            let (l0, l1) = (b0.log10(), b1.log10());
            Some(s0 + (s1 - s0) * (l0 - lt) / (l0 - l1))
        } else {
            None
        }
    })
}

/// Horizontal gap (dB) between the two curves of one alpha at `target` BER.
pub fn horizontal_gap(pairs: &[BerPair], alpha: f64, target: f64) -> Option<f64> {
    let sel: Vec<&BerPair> = pairs.iter().filter(|p| p.alpha == alpha).collect();
    let est: Vec<(f64, f64)> = sel.iter().map(|p| (p.snr_db, p.ber_estimation)).collect();
    let abs: Vec<(f64, f64)> = sel.iter().map(|p| (p.snr_db, p.ber_abstraction)).collect();
    Some((crossing_db(&est, target)? - crossing_db(&abs, target)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form BER of QPSK on flat Rayleigh fading with ideal CSI at
    /// symbol SNR `gamma`.
    fn rayleigh_qpsk_ber(gamma: f64) -> f64 {
        let g = gamma / 2.0;
        0.5 * (1.0 - (g / (1.0 + g)).sqrt())
    }

    #[test]
    fn no_leak_matches_ideal_rayleigh() {
        let exp = AbstractionExperiment {
            alphas: vec![0.0],
            snr_grid: vec![0.0, 10.0, 20.0],
            symbols: 100_000,
            ..Default::default()
        };
        for p in estimation_vs_abstraction(&exp) {
            let ideal = rayleigh_qpsk_ber(db_to_linear(p.snr_db));
            // binomial standard error with a generous factor
            let tol = 5.0 * (ideal * (1.0 - ideal) / p.bits as f64).sqrt();
            assert!((p.ber_estimation - ideal).abs() < tol, "{p:?} vs {ideal}");
            assert!((p.ber_abstraction - ideal).abs() < tol, "{p:?} vs {ideal}");
        }
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let pts = [(-2.0, 0.02), (0.0, 0.005)];
        let x = crossing_db(&pts, 0.01).unwrap();
        // log-linear: halfway in log10 between 0.02 and 0.005 is 0.01
        assert!((x + 1.0).abs() < 1e-12);
        assert_eq!(crossing_db(&[(0.0, 0.5), (1.0, 0.4)], 0.01), None);
    }
}
