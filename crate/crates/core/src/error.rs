use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid array configuration: {0}")]
    InvalidArray(String),

    #[error("beam index {index} out of range 1..={count}")]
    BeamIndex { index: usize, count: usize },

    #[error("empty azimuth grid")]
    EmptyGrid,

    #[error("unsupported bandwidth {0} MHz")]
    UnsupportedBandwidth(f64),

    #[error("invalid CFI {0}, expected 1, 2 or 3")]
    InvalidCfi(u8),

    #[error("grid of {n_cce} CCEs cannot hold aggregation level {al}")]
    GridTooSmall { n_cce: usize, al: usize },

    #[error("malformed DCI request: {0}")]
    MalformedRequest(String),

    #[error("expected {expected} bits, got {actual}")]
    BitLength { expected: usize, actual: usize },

    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),

    #[error("distance {0} m is below model validity")]
    DistanceTooShort(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
