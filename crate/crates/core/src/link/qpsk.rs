//! Gray-mapped QPSK with unit average symbol energy.

use num_complex::Complex64;

use crate::error::{Error, Result};

const AMP: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Bit pairs `(b0, b1)` map to `((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)`.
pub fn qpsk_modulate(bits: &[u8]) -> Result<Vec<Complex64>> {
    if bits.len() % 2 != 0 {
        return Err(Error::OddBitCount(bits.len()));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            Complex64::new(
                AMP * (1.0 - 2.0 * p[0] as f64),
                AMP * (1.0 - 2.0 * p[1] as f64),
            )
        })
        .collect())
}

/// Exact LLRs (positive favours 0) for symbols through complex noise of
/// total variance `noise_var`.
pub fn qpsk_soft_demod(symbols: &[Complex64], noise_var: f64) -> Vec<f64> {
    let scale = 4.0 * AMP / noise_var;
    symbols
        .iter()
        .flat_map(|y| [scale * y.re, scale * y.im])
        .collect()
}

/// LLRs after a known flat gain `h`: `y` is equalized by matched filtering.
pub fn qpsk_soft_demod_faded(
    symbols: &[Complex64],
    gains: &[Complex64],
    noise_var: f64,
) -> Vec<f64> {
    let scale = 4.0 * AMP / noise_var;
    symbols
        .iter()
        .zip(gains)
        .flat_map(|(y, h)| {
            let z = h.conj() * y;
            [scale * z.re, scale * z.im]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constellation_and_energy() {
        let s = qpsk_modulate(&[0, 0, 1, 1, 0, 1, 1, 0]).unwrap();
        assert!((s[0] - Complex64::new(AMP, AMP)).norm() < 1e-15);
        assert!((s[1] - Complex64::new(-AMP, -AMP)).norm() < 1e-15);
        assert!(s.iter().all(|x| (x.norm_sqr() - 1.0).abs() < 1e-12));
        assert!(qpsk_modulate(&[0, 1, 1]).is_err());
    }

    #[test]
    fn signs_recover_bits_and_scale_with_noise() {
        let bits = [0, 1, 1, 0, 1, 1, 0, 0];
        let s = qpsk_modulate(&bits).unwrap();
        let llr = qpsk_soft_demod(&s, 0.5);
        let back: Vec<u8> = llr.iter().map(|&l| (l < 0.0) as u8).collect();
        assert_eq!(back, bits);
        let llr2 = qpsk_soft_demod(&s, 0.25);
        for (a, b) in llr.iter().zip(&llr2) {
            assert!((b / a - 2.0).abs() < 1e-12);
        }
    }
}
