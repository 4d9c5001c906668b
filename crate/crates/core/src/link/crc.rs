//! CRC-16 with generator x^16 + x^12 + x^5 + 1, zero initial register,
//! MSB first, no final inversion.

use crate::error::{Error, Result};

const POLY: u16 = 0x1021;

fn remainder(bits: &[u8]) -> u16 {
    let mut reg: u16 = 0;
    for &b in bits {
        let feedback = ((reg >> 15) as u8 ^ (b & 1)) != 0;
        reg <<= 1;
        if feedback {
            reg ^= POLY;
        }
    }
    reg
}

/// Append 16 parity bits to a 31-bit payload.
pub fn crc_attach(payload: &[u8]) -> Result<Vec<u8>> {
    if payload.len() != crate::control::DCI_PAYLOAD_BITS {
        return Err(Error::BitLength {
            expected: crate::control::DCI_PAYLOAD_BITS,
            actual: payload.len(),
        });
    }
    let rem = remainder(payload);
    let mut out = payload.to_vec();
    out.extend((0..16).rev().map(|i| ((rem >> i) & 1) as u8));
    Ok(out)
}

/// True when the trailing 16 bits match the parity of the leading bits.
pub fn crc_check(block: &[u8]) -> bool {
    block.len() > 16 && remainder(block) == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_payload_has_zero_parity() {
        let out = crc_attach(&[0; 31]).unwrap();
        assert!(out[31..].iter().all(|&b| b == 0));
        assert!(crc_check(&out));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(crc_attach(&[0; 30]).is_err());
    }

    #[test]
    fn round_trip_and_single_flip_detection() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let payload: Vec<u8> = (0..31).map(|_| rng.random_range(0..2)).collect();
            let block = crc_attach(&payload).unwrap();
            assert!(crc_check(&block));
            for i in 0..47 {
                let mut bad = block.clone();
                bad[i] ^= 1;
                assert!(!crc_check(&bad), "flip at {i} undetected");
            }
        }
    }

    #[test]
    fn known_vector() {
        // "123456789" through CRC-16/XMODEM is 0x31C3
        let bits: Vec<u8> = b"123456789"
            .iter()
            .flat_map(|byte| (0..8).rev().map(move |i| (byte >> i) & 1))
            .collect();
        assert_eq!(remainder(&bits), 0x31C3);
    }
}
