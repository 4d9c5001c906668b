//! Circular-buffer rate matching of the 141 coded bits onto `72 * AL` bits.
//!
//! Each of the three coded streams passes through the 32-column sub-block
//! interleaver before the streams are concatenated into the circular
//! buffer. Reading the buffer repeats bits for AL >= 2 and punctures for
//! AL = 1; the interleaver spreads AL = 1 puncturing evenly over the
//! trellis instead of removing a contiguous run of one stream.

use super::{BITS_PER_CCE, CODED_BITS};
use crate::control::AggregationLevel;
use crate::error::{Error, Result};

const COLUMNS: usize = 32;
const COLUMN_PERMUTATION: [usize; COLUMNS] = [
    1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31, 0, 16, 8, 24, 4, 20, 12, 28, 2, 18,
    10, 26, 6, 22, 14, 30,
];

/// Rate matcher for a fixed coded length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateMatcher {
    /// Circular buffer as indices into the stream-major coded block.
    buffer: Vec<usize>,
}

impl RateMatcher {
    /// Interleaved circular buffer for `coded_len` bits (three streams).
    pub fn new(coded_len: usize) -> Self {
        assert!(coded_len % 3 == 0);
        let d = coded_len / 3;
        let rows = d.div_ceil(COLUMNS);
        let dummies = rows * COLUMNS - d;
        let mut buffer = Vec::with_capacity(coded_len);
        for stream in 0..3 {
            for &col in &COLUMN_PERMUTATION {
                for row in 0..rows {
                    let pos = row * COLUMNS + col;
                    if pos >= dummies {
                        buffer.push(stream * d + pos - dummies);
                    }
                }
            }
        }
        Self { buffer }
    }

    /// Plain circular buffer over the coded block, no interleaving.
    pub fn plain(coded_len: usize) -> Self {
        Self {
            buffer: (0..coded_len).collect(),
        }
    }

    /// Order in which coded bits are read out.
    pub fn buffer(&self) -> &[usize] {
        &self.buffer
    }

    pub fn output_len(al: AggregationLevel) -> usize {
        al.cces() * BITS_PER_CCE
    }

    pub fn rate_match(&self, coded: &[u8], al: AggregationLevel) -> Result<Vec<u8>> {
        if coded.len() != self.buffer.len() {
            return Err(Error::BitLength {
                expected: self.buffer.len(),
                actual: coded.len(),
            });
        }
        let n = self.buffer.len();
        Ok((0..Self::output_len(al))
            .map(|i| coded[self.buffer[i % n]])
            .collect())
    }

    /// Soft combining back onto the coded block: repeated positions add,
    /// punctured positions stay at zero.
    pub fn combine(&self, soft: &[f64]) -> Vec<f64> {
        let n = self.buffer.len();
        let mut out = vec![0.0; n];
        for (i, &v) in soft.iter().enumerate() {
            out[self.buffer[i % n]] += v;
        }
        out
    }
}

impl Default for RateMatcher {
    fn default() -> Self {
        Self::new(CODED_BITS)
    }
}

/// Rate match with the default interleaved buffer.
pub fn rate_match(coded: &[u8], al: AggregationLevel) -> Result<Vec<u8>> {
    RateMatcher::default().rate_match(coded, al)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AggregationLevel::*;

    fn sample() -> Vec<u8> {
        (0..141).map(|i| ((i * 7 + i / 5) % 2) as u8).collect()
    }

    #[test]
    fn buffer_is_a_permutation() {
        let rm = RateMatcher::default();
        let mut seen = rm.buffer().to_vec();
        seen.sort_unstable();
        assert_eq!(seen, (0..141).collect::<Vec<_>>());
    }

    #[test]
    fn output_lengths() {
        let c = sample();
        for al in AggregationLevel::ALL {
            assert_eq!(rate_match(&c, al).unwrap().len(), 72 * al.cces());
        }
        assert!(rate_match(&c[..140], L1).is_err());
    }

    #[test]
    fn al2_repeats_buffer_head() {
        let c = sample();
        let rm = RateMatcher::default();
        let out = rm.rate_match(&c, L2).unwrap();
        let buffered: Vec<u8> = rm.buffer().iter().map(|&i| c[i]).collect();
        assert_eq!(&out[..141], &buffered[..]);
        assert_eq!(&out[141..], &buffered[..3]);
        let plain = RateMatcher::plain(141).rate_match(&c, L2).unwrap();
        assert_eq!(&plain[..141], &c[..]);
        assert_eq!(&plain[141..], &c[..3]);
    }

    #[test]
    fn al8_is_four_laps_plus_twelve() {
        let c = sample();
        let rm = RateMatcher::default();
        let out = rm.rate_match(&c, L8).unwrap();
        assert_eq!(out.len(), 4 * 141 + 12);
        for lap in 0..4 {
            assert_eq!(&out[lap * 141..(lap + 1) * 141], &out[..141]);
        }
        assert_eq!(&out[564..], &out[..12]);
    }

    #[test]
    fn al1_keeps_every_input_step_covered() {
        // with interleaving every trellis step keeps at least one coded bit
        let rm = RateMatcher::default();
        let kept = &rm.buffer()[..72];
        for t in 0..47 {
            assert!(
                kept.iter().any(|&i| i % 47 == t),
                "step {t} fully punctured"
            );
        }
    }

    #[test]
    fn combine_adds_repeats() {
        let rm = RateMatcher::default();
        let soft = vec![1.0; 576];
        let comb = rm.combine(&soft);
        let fives = comb.iter().filter(|&&v| v == 5.0).count();
        assert_eq!(fives, 12);
        assert!(comb.iter().all(|&v| v == 4.0 || v == 5.0));
        let punct = rm.combine(&vec![1.0; 72]);
        assert_eq!(punct.iter().filter(|&&v| v == 0.0).count(), 141 - 72);
    }
}
