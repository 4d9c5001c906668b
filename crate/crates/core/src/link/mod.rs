//! Bit-level DCI link chain: CRC, tail-biting convolutional code, rate
//! matching onto CCEs and QPSK, plus the Monte Carlo drivers built on it.

pub mod bler;
pub mod crc;
pub mod estimation;
pub mod qpsk;
pub mod rate_match;
pub mod tbcc;

pub use bler::{simulate_bler, BlerCurve, ChannelKind, LinkChainConfig};
pub use crc::{crc_attach, crc_check};
pub use estimation::{estimation_vs_abstraction, AbstractionExperiment, BerPair};
pub use qpsk::{qpsk_modulate, qpsk_soft_demod};
pub use rate_match::RateMatcher;
pub use tbcc::{tbcc_encode, viterbi_decode};

/// Bits per CCE: 9 REGs x 4 REs x 2 bits (QPSK).
pub const BITS_PER_CCE: usize = 72;

/// CRC length.
pub const CRC_BITS: usize = 16;

/// Payload plus CRC.
pub const CODED_INPUT_BITS: usize = crate::control::DCI_PAYLOAD_BITS + CRC_BITS;

/// Mother code output length (rate 1/3).
pub const CODED_BITS: usize = 3 * CODED_INPUT_BITS;

/// Payload to QPSK symbols: CRC, tail-biting code, rate matching onto
/// `al` CCEs.
pub fn encode_dci(
    matcher: &RateMatcher,
    payload: &[u8],
    al: crate::control::AggregationLevel,
) -> crate::Result<Vec<num_complex::Complex64>> {
    let block = crc_attach(payload)?;
    let coded = tbcc_encode(&block)?;
    qpsk_modulate(&matcher.rate_match(&coded, al)?)
}

/// Soft-decode `llr` (one value per rate-matched bit). The payload comes
/// back only when the CRC checks.
pub fn decode_dci(matcher: &RateMatcher, llr: &[f64]) -> Option<Vec<u8>> {
    let decoded = viterbi_decode(&matcher.combine(llr));
    crc_check(&decoded).then(|| decoded[..crate::control::DCI_PAYLOAD_BITS].to_vec())
}
