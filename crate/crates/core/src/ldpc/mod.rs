//! LDPC codes: parity-check model, systematic encoding and sum-product decoding.

mod alist;
mod decoder;
mod encoder;
pub mod peg;
mod sparse;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use decoder::{BpDecoder, DecodeOutcome, TannerGraph, LLR_CLIP};
pub use encoder::SystematicCode;
pub use sparse::{BitMatrix, SparseBinaryMatrix};

use crate::error::{Error, Result};

/// Variable- and check-node degree histograms (degree → count).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub variable: BTreeMap<usize, usize>,
    pub check: BTreeMap<usize, usize>,
}

/// A binary LDPC code given by its `(n − k) × n` parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdpcCode {
    h: SparseBinaryMatrix,
}

impl LdpcCode {
    pub fn new(h: SparseBinaryMatrix) -> Self {
        LdpcCode { h }
    }

    pub fn load_alist(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_alist(&text)
    }

    pub fn parse_alist(text: &str) -> Result<Self> {
        alist::parse(text).map(Self::new)
    }

    pub fn to_alist(&self) -> String {
        alist::write(&self.h)
    }

    pub fn h(&self) -> &SparseBinaryMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    /// Nominal dimension `n − rows(H)`.
    pub fn k(&self) -> usize {
        self.h.ncols() - self.h.nrows()
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut p = DegreeProfile::default();
        for c in 0..self.h.ncols() {
            *p.variable.entry(self.h.col(c).len()).or_default() += 1;
        }
        for r in 0..self.h.nrows() {
            *p.check.entry(self.h.row(r).len()).or_default() += 1;
        }
        p
    }

    /// Rank of `H` over GF(2).
    pub fn rank(&self) -> usize {
        encoder::gf2_rank(&self.h)
    }

    pub fn syndrome_is_zero(&self, word: &[u8]) -> bool {
        self.h.syndrome_is_zero(word)
    }

    /// Systematic form `[I_k | P]`, permuting columns when required.
    pub fn systematize(&self) -> Result<SystematicCode> {
        SystematicCode::new(self)
    }
}

/// Systematic encoding of `data` with a shared code.
pub fn encode(code: &SystematicCode, data: &[u8]) -> Result<Vec<u8>> {
    code.encode(data)
}

/// One sum-product decoding run with a fresh decoder.
pub fn decode(code: &Arc<SystematicCode>, llrs: &[f64], max_iter: usize) -> DecodeOutcome {
    BpDecoder::new(code.graph()).decode(llrs, max_iter)
}

/// Codes shipped with the crate, as alist text.
pub mod shipped {
    pub const HAMMING_7_4: &str = include_str!("../../data/hamming_7_4.alist");
    /// PEG code, n = 1008, 336 checks, column weight 3 (rate 2/3).
    pub const PEG_N1008_R2_3: &str = include_str!("../../data/peg_n1008_r2_3.alist");
    /// PEG code, n = 1008, 420 checks, column weight 3 (rate 7/12).
    pub const PEG_N1008_R7_12: &str = include_str!("../../data/peg_n1008_r7_12.alist");

    /// Looks up a shipped code by file stem.
    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "hamming_7_4" => Some(HAMMING_7_4),
            "peg_n1008_r2_3" => Some(PEG_N1008_R2_3),
            "peg_n1008_r7_12" => Some(PEG_N1008_R7_12),
            _ => None,
        }
    }
}

/// The Hamming(7,4) code with `H = [A | I_3]`.
pub fn hamming_7_4() -> LdpcCode {
    LdpcCode::new(SparseBinaryMatrix::from_dense(&[
        vec![1, 1, 0, 1, 1, 0, 0],
        vec![1, 0, 1, 1, 0, 1, 0],
        vec![0, 1, 1, 1, 0, 0, 1],
    ]))
}
