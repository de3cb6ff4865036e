use std::sync::Arc;

use super::decoder::TannerGraph;
use super::sparse::{BitMatrix, SparseBinaryMatrix};
use super::LdpcCode;
use crate::error::{Error, Result};

pub(super) fn gf2_rank(h: &SparseBinaryMatrix) -> usize {
    let mut d = BitMatrix::from_sparse(h);
    let mut rank = 0;
    for col in 0..d.ncols() {
        if rank == d.nrows() {
            break;
        }
        let Some(pivot) = (rank..d.nrows()).find(|&r| d.get(r, col)) else {
            continue;
        };
        d.swap_rows(rank, pivot);
        for r in rank + 1..d.nrows() {
            if d.get(r, col) {
                d.xor_rows(r, rank);
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug)]
enum Encoder {
    /// Parity block lower triangular under a row ordering: each entry is
    /// `(parity column, row)` in solve order.
    Triangular(Vec<(usize, usize)>),
    /// Dense parity part `P` (k × (n − k)).
    Dense(BitMatrix),
}

/// A code in systematic coordinates: codewords are `[data | parity]` and
/// `h()` is the parity-check matrix with columns permuted accordingly.
#[derive(Clone, Debug)]
pub struct SystematicCode {
    code: LdpcCode,
    column_order: Vec<usize>,
    encoder: Encoder,
    graph: Arc<TannerGraph>,
}

impl SystematicCode {
    pub(super) fn new(code: &LdpcCode) -> Result<Self> {
        let (n, k) = (code.n(), code.k());
        if let Some(order) = triangular_order(code.h(), k) {
            return Ok(Self::assemble(
                code.clone(),
                (0..n).collect(),
                Encoder::Triangular(order),
            ));
        }
        let (column_order, parity) = eliminate(code.h())?;
        let permuted = LdpcCode::new(code.h().permute_columns(&column_order));
        Ok(Self::assemble(permuted, column_order, Encoder::Dense(parity)))
    }

    /// Forces the dense elimination path.
    #[cfg(test)]
    pub(super) fn new_dense(code: &LdpcCode) -> Result<Self> {
        let (column_order, parity) = eliminate(code.h())?;
        let permuted = LdpcCode::new(code.h().permute_columns(&column_order));
        Ok(Self::assemble(permuted, column_order, Encoder::Dense(parity)))
    }

    fn assemble(code: LdpcCode, column_order: Vec<usize>, encoder: Encoder) -> Self {
        let graph = Arc::new(TannerGraph::new(code.h()));
        SystematicCode {
            code,
            column_order,
            encoder,
            graph,
        }
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    /// Parity-check matrix in systematic coordinates.
    pub fn h(&self) -> &SparseBinaryMatrix {
        self.code.h()
    }

    pub fn code(&self) -> &LdpcCode {
        &self.code
    }

    /// `column_order()[j]` is the original column placed at position `j`.
    pub fn column_order(&self) -> &[usize] {
        &self.column_order
    }

    pub fn is_permuted(&self) -> bool {
        self.column_order.iter().enumerate().any(|(j, &c)| j != c)
    }

    pub fn graph(&self) -> &Arc<TannerGraph> {
        &self.graph
    }

    /// Reorders a codeword from systematic to original column order.
    pub fn to_original_order(&self, word: &[u8]) -> Vec<u8> {
        let mut out = vec![0; word.len()];
        for (j, &c) in self.column_order.iter().enumerate() {
            out[c] = word[j];
        }
        out
    }

    /// Materializes `P` by encoding unit vectors.
    pub fn parity_part(&self) -> BitMatrix {
        let (n, k) = (self.n(), self.k());
        if let Encoder::Dense(p) = &self.encoder {
            return p.clone();
        }
        let mut p = BitMatrix::zeros(k, n - k);
        let mut unit = vec![0u8; k];
        for i in 0..k {
            unit[i] = 1;
            let word = self.encode(&unit).expect("length matches");
            for (j, &b) in word[k..].iter().enumerate() {
                p.set(i, j, b == 1);
            }
            unit[i] = 0;
        }
        p
    }

    /// Codeword `[data | data · P]`.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<u8>> {
        let (n, k) = (self.n(), self.k());
        if data.len() != k {
            return Err(Error::InputLength {
                expected: k,
                got: data.len(),
            });
        }
        let mut word = vec![0u8; n];
        word[..k].copy_from_slice(data);
        match &self.encoder {
            Encoder::Triangular(order) => {
                let h = self.code.h();
                for &(col, row) in order {
                    let bit = h
                        .row(row)
                        .iter()
                        .filter(|&&c| c != col)
                        .fold(0u8, |acc, &c| acc ^ word[c]);
                    word[col] = bit;
                }
            }
            Encoder::Dense(p) => {
                let mut acc = vec![0u64; (n - k).div_ceil(64).max(1)];
                for (i, &b) in data.iter().enumerate() {
                    if b & 1 == 1 {
                        for (a, w) in acc.iter_mut().zip(p.row_words(i)) {
                            *a ^= w;
                        }
                    }
                }
                for j in 0..n - k {
                    word[k + j] = ((acc[j / 64] >> (j % 64)) & 1) as u8;
                }
            }
        }
        Ok(word)
    }
}

/// Solve order when each row has a distinct highest parity column.
fn triangular_order(h: &SparseBinaryMatrix, k: usize) -> Option<Vec<(usize, usize)>> {
    let m = h.nrows();
    let mut row_of_lead = vec![usize::MAX; m];
    for r in 0..m {
        let lead = *h.row(r).iter().rev().find(|&&c| c >= k)?;
        let slot = &mut row_of_lead[lead - k];
        if *slot != usize::MAX {
            return None;
        }
        *slot = r;
    }
    Some(
        row_of_lead
            .into_iter()
            .enumerate()
            .map(|(j, r)| (k + j, r))
            .collect(),
    )
}

/// Reduced row echelon form with pivots taken from the rightmost columns.
/// Returns the column order (information columns, then pivot columns) and
/// the dense parity part.
fn eliminate(h: &SparseBinaryMatrix) -> Result<(Vec<usize>, BitMatrix)> {
    let (m, n) = (h.nrows(), h.ncols());
    let mut d = BitMatrix::from_sparse(h);
    let mut pivots: Vec<usize> = Vec::with_capacity(m);
    for col in (0..n).rev() {
        let rank = pivots.len();
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| d.get(r, col)) else {
            continue;
        };
        d.swap_rows(rank, p);
        for r in 0..m {
            if r != rank && d.get(r, col) {
                d.xor_rows(r, rank);
            }
        }
        pivots.push(col);
    }
    if pivots.len() < m {
        return Err(Error::RankDeficient {
            rank: pivots.len(),
            expected: m,
        });
    }
    let mut pairs: Vec<(usize, usize)> = pivots.iter().copied().zip(0..m).collect();
    pairs.sort_unstable();
    let pivots: Vec<usize> = pairs.iter().map(|&(c, _)| c).collect();
    let mut is_pivot = vec![false; n];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    let info: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
    let k = info.len();
    let mut parity = BitMatrix::zeros(k, m);
    for (i, &col) in info.iter().enumerate() {
        for (j, &(_, r)) in pairs.iter().enumerate() {
            if d.get(r, col) {
                parity.set(i, j, true);
            }
        }
    }
    let mut order = info;
    order.extend(pivots);
    Ok((order, parity))
}
