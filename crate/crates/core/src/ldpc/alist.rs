//! Reading and writing parity-check matrices in the alist text format.

use std::fmt::Write as _;

use super::sparse::SparseBinaryMatrix;
use crate::error::{Error, Result};

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedAlist(msg.into())
}

fn parse_numbers(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| malformed(format!("not a number: {t:?}")))
        })
        .collect()
}

/// Parses an alist description. Zero entries in the adjacency lines are
/// treated as padding.
pub fn parse(text: &str) -> Result<SparseBinaryMatrix> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    let mut cursor = 0;
    let mut next_line = || -> Result<Vec<usize>> {
        let line = lines
            .get(cursor)
            .ok_or_else(|| malformed("unexpected end of file"))?;
        cursor += 1;
        parse_numbers(line)
    };

    let dims = next_line()?;
    let [n, m] = dims[..] else {
        return Err(malformed("first line must hold `n m`"));
    };
    let maxes = next_line()?;
    let [max_col, max_row] = maxes[..] else {
        return Err(malformed("second line must hold the maximum degrees"));
    };
    let mut gather = |count: usize| -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            out.extend(next_line()?);
        }
        if out.len() != count {
            return Err(malformed("degree list length mismatch"));
        }
        Ok(out)
    };
    let col_deg = gather(n)?;
    let row_deg = gather(m)?;
    if col_deg.iter().max().copied().unwrap_or(0) != max_col
        || row_deg.iter().max().copied().unwrap_or(0) != max_row
    {
        return Err(malformed("maximum degrees disagree with degree lists"));
    }

    let mut h = SparseBinaryMatrix::new(m, n);
    for (c, &deg) in col_deg.iter().enumerate() {
        let entries: Vec<usize> = next_line()?.into_iter().filter(|&r| r != 0).collect();
        if entries.len() != deg {
            return Err(malformed(format!(
                "column {} lists {} entries, degree {}",
                c + 1,
                entries.len(),
                deg
            )));
        }
        for r in entries {
            if r > m {
                return Err(malformed(format!("row index {r} exceeds {m}")));
            }
            if h.contains(r - 1, c) {
                return Err(malformed(format!("duplicate entry ({r}, {})", c + 1)));
            }
            h.insert(r - 1, c);
        }
    }
    for (r, &deg) in row_deg.iter().enumerate() {
        let entries: Vec<usize> = next_line()?.into_iter().filter(|&c| c != 0).collect();
        if entries.len() != deg {
            return Err(malformed(format!(
                "row {} lists {} entries, degree {}",
                r + 1,
                entries.len(),
                deg
            )));
        }
        let mut sorted: Vec<usize> = entries.iter().map(|&c| c.wrapping_sub(1)).collect();
        sorted.sort_unstable();
        if sorted != h.row(r) {
            return Err(malformed(format!(
                "row {} disagrees with the column lists",
                r + 1
            )));
        }
    }
    Ok(h)
}

/// Serializes in the zero-padded alist layout.
pub fn write(h: &SparseBinaryMatrix) -> String {
    let (m, n) = (h.nrows(), h.ncols());
    let col_deg: Vec<usize> = (0..n).map(|c| h.col(c).len()).collect();
    let row_deg: Vec<usize> = (0..m).map(|r| h.row(r).len()).collect();
    let max_col = col_deg.iter().copied().max().unwrap_or(0);
    let max_row = row_deg.iter().copied().max().unwrap_or(0);
    let join = |v: &[usize]| {
        v.iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let padded = |v: &[usize], width: usize| {
        let mut out: Vec<usize> = v.iter().map(|x| x + 1).collect();
        out.resize(width, 0);
        join(&out)
    };
    let mut s = String::new();
    writeln!(s, "{n} {m}").unwrap();
    writeln!(s, "{max_col} {max_row}").unwrap();
    writeln!(s, "{}", join(&col_deg)).unwrap();
    writeln!(s, "{}", join(&row_deg)).unwrap();
    for c in 0..n {
        writeln!(s, "{}", padded(h.col(c), max_col)).unwrap();
    }
    for r in 0..m {
        writeln!(s, "{}", padded(h.row(r), max_row)).unwrap();
    }
    s
}
