use std::path::PathBuf;

/// Errors raised across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bits per symbol m={0} outside supported range 2..=8")]
    BitsPerSymbol(u32),
    #[error("target second moment {target} outside feasible range [1, {max}]")]
    InfeasibleTarget { target: f64, max: f64 },
    #[error("power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("distribution does not sum to one (sum = {0})")]
    Unnormalized(f64),
    #[error("bit level {level} outside 1..={m}")]
    BitLevel { level: usize, m: u32 },
    #[error("rate {rate} outside feasible range [{min}, {max}]")]
    InfeasibleRate { rate: f64, min: f64, max: f64 },
    #[error("k={k} exceeds floor(log2 multinomial)={max}")]
    InvalidK { k: u64, max: u64 },
    #[error("expected {expected} input bits, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("sequence composition {got:?} does not match {expected:?}")]
    CompositionMismatch { expected: Vec<u64>, got: Vec<u64> },
    #[error("symbol {0} not in the matcher alphabet")]
    UnknownSymbol(u32),
    #[error("sequence is not a codeword of the matcher")]
    NotInCodebook,
    #[error("malformed alist: {0}")]
    MalformedAlist(String),
    #[error("parity-check matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("code rate {rate} unsupported for m={m}: {reason}")]
    UnsupportedRate { rate: String, m: u32, reason: String },
    #[error("amplitude {0} not in the constellation")]
    AlphabetViolation(u32),
    #[error("invalid bit-mapper {0:?}")]
    InvalidBitMapper(Vec<usize>),
    #[error("root search failed: {0}")]
    RootSearch(String),
    #[error("operating-point search exhausted after {} points", trace.len())]
    SearchFailure { trace: Vec<crate::sim::OperatingPoint> },
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
