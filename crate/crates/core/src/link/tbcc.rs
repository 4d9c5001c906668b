//! Rate-1/3, constraint-length-7 tail-biting convolutional code
//! (generators 133, 171, 165 octal) and its wrap-around Viterbi decoder.
//!
//! Coded output is stream-major: all `d0` bits, then `d1`, then `d2`.
//! Soft inputs to the decoder are LLRs with positive values favouring 0.

use crate::error::{Error, Result};

const MEMORY: usize = 6;
const STATES: usize = 1 << MEMORY;
const GENERATORS: [u8; 3] = [0o133, 0o171, 0o165];

/// Encoder register: bit 6 is the current input, bits 5..0 the previous six
/// inputs (most recent first).
#[inline]
fn outputs(input: u8, state: usize) -> [u8; 3] {
    let reg = ((input as u32) << MEMORY) | state as u32;
    GENERATORS.map(|g| ((reg & g as u32).count_ones() & 1) as u8)
}

#[inline]
fn next_state(input: u8, state: usize) -> usize {
    ((input as usize) << (MEMORY - 1)) | (state >> 1)
}

/// Encoder start state: the last six input bits, most recent first.
pub fn initial_state(bits: &[u8]) -> usize {
    let n = bits.len();
    (1..=MEMORY.min(n)).fold(0, |s, i| s | ((bits[n - i] as usize) << (MEMORY - i)))
}

/// Encode a block, also returning the final encoder state.
pub fn encode_with_state(bits: &[u8]) -> (Vec<u8>, usize) {
    let k = bits.len();
    let mut out = vec![0u8; 3 * k];
    let mut state = initial_state(bits);
    for (t, &b) in bits.iter().enumerate() {
        let d = outputs(b, state);
        for (j, &bit) in d.iter().enumerate() {
            out[j * k + t] = bit;
        }
        state = next_state(b, state);
    }
    (out, state)
}

/// Tail-biting encode of the 47-bit CRC-protected DCI.
pub fn tbcc_encode(bits: &[u8]) -> Result<Vec<u8>> {
    if bits.len() != super::CODED_INPUT_BITS {
        return Err(Error::BitLength {
            expected: super::CODED_INPUT_BITS,
            actual: bits.len(),
        });
    }
    Ok(encode_with_state(bits).0)
}

/// Expected outputs as +1 (bit 0) / -1 (bit 1) for every (state, input).
fn branch_signs() -> [[[f64; 3]; 2]; STATES] {
    let mut t = [[[0.0; 3]; 2]; STATES];
    for (s, row) in t.iter_mut().enumerate() {
        for u in 0..2u8 {
            let d = outputs(u, s);
            row[u as usize] = d.map(|b| if b == 0 { 1.0 } else { -1.0 });
        }
    }
    t
}

/// Wrap-around Viterbi decoding of a tail-biting block.
///
/// `soft` holds `3 * k` LLRs in the encoder's stream-major layout. The
/// trellis is run three times around the block starting from equal metrics
/// and traced back from the best end state. The middle lap is returned: the
/// first lap lets the metrics settle and the last gives its decisions a full
/// block of traceback depth.
pub fn viterbi_decode(soft: &[f64]) -> Vec<u8> {
    assert!(soft.len() % 3 == 0, "soft input must be a multiple of 3");
    let k = soft.len() / 3;
    if k == 0 {
        return Vec::new();
    }
    let signs = branch_signs();
    let steps = 3 * k;
    let mut metric = [0.0f64; STATES];
    // predecessor choice per step and state: the dropped oldest bit
    let mut survivors = vec![0u64; steps];
    for t in 0..steps {
        let pos = t % k;
        let llr = [soft[pos], soft[k + pos], soft[2 * k + pos]];
        let mut next = [f64::NEG_INFINITY; STATES];
        let mut choice = 0u64;
        for (ns, slot) in next.iter_mut().enumerate() {
            let u = ns >> (MEMORY - 1);
            let base = (ns << 1) & (STATES - 1);
            let mut best = f64::NEG_INFINITY;
            let mut pick = 0;
            for low in 0..2 {
                let s = base | low;
                let e = &signs[s][u];
                let m = metric[s] + e[0] * llr[0] + e[1] * llr[1] + e[2] * llr[2];
                if m > best {
                    best = m;
                    pick = low;
                }
            }
            *slot = best;
            choice |= (pick as u64) << ns;
        }
        survivors[t] = choice;
        // renormalize to keep magnitudes bounded over long runs
        let top = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (m, n) in metric.iter_mut().zip(next) {
            *m = n - top;
        }
    }
    let mut state = metric
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(s, _)| s)
        .unwrap_or(0);
    let mut decoded = vec![0u8; k];
    for t in (0..steps).rev() {
        let u = (state >> (MEMORY - 1)) as u8;
        if (k..2 * k).contains(&t) {
            decoded[t - k] = u;
        }
        let low = ((survivors[t] >> state) & 1) as usize;
        state = ((state << 1) & (STATES - 1)) | low;
    }
    decoded
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
        (0..n).map(|_| rng.random_range(0..2)).collect()
    }

    fn to_llr(bits: &[u8]) -> Vec<f64> {
        bits.iter()
            .map(|&b| if b == 0 { 1.0 } else { -1.0 })
            .collect()
    }

    #[test]
    fn zero_in_zero_out() {
        let out = tbcc_encode(&[0; 47]).unwrap();
        assert_eq!(out.len(), 141);
        assert!(out.iter().all(|&b| b == 0));
        assert!(tbcc_encode(&[0; 46]).is_err());
    }

    #[test]
    fn end_state_equals_start_state() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let bits = random_bits(&mut rng, 47);
            let (_, end) = encode_with_state(&bits);
            assert_eq!(end, initial_state(&bits));
        }
    }

    #[test]
    fn impulse_response_matches_generators() {
        let mut bits = vec![0u8; 47];
        bits[0] = 1;
        let (out, _) = encode_with_state(&bits);
        // at t=0 the register is 1000000: every generator's top tap is set
        assert_eq!([out[0], out[47], out[94]], [1, 1, 1]);
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let bits = random_bits(&mut rng, 47);
            let coded = tbcc_encode(&bits).unwrap();
            assert_eq!(viterbi_decode(&to_llr(&coded)), bits);
        }
    }

    #[test]
    fn corrects_single_flipped_bit() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let bits = random_bits(&mut rng, 47);
            let coded = tbcc_encode(&bits).unwrap();
            let flip = rng.random_range(0..141);
            let mut llr = to_llr(&coded);
            llr[flip] = -llr[flip];
            assert_eq!(viterbi_decode(&llr), bits);
        }
    }

    #[test]
    fn zero_soft_input_still_decodes() {
        let out = viterbi_decode(&[0.0; 141]);
        assert_eq!(out.len(), 47);
    }
}
