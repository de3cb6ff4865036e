//! Progressive edge-growth construction of regular-column LDPC codes.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::sparse::SparseBinaryMatrix;
use super::LdpcCode;
use crate::error::{Error, Result};

/// PEG parity-check matrix with `checks` rows, `n` columns and column weight `dv`.
pub fn construct(n: usize, checks: usize, dv: usize, seed: u64) -> SparseBinaryMatrix {
    assert!(dv >= 1 && dv <= checks, "column weight must lie in 1..=checks");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = SparseBinaryMatrix::new(checks, n);
    let mut degree = vec![0usize; checks];
    let mut seen = vec![usize::MAX; checks];
    let mut seen_var = vec![usize::MAX; n];
    for v in 0..n {
        for edge in 0..dv {
            let candidates: Vec<usize> = if edge == 0 {
                (0..checks).collect()
            } else {
                unreached_checks(&h, v, &mut seen, &mut seen_var)
            };
            let min_deg = candidates.iter().map(|&c| degree[c]).min().expect("nonempty");
            let lowest: Vec<usize> = candidates
                .into_iter()
                .filter(|&c| degree[c] == min_deg)
                .collect();
            let &c = lowest.choose(&mut rng).expect("nonempty");
            h.insert(c, v);
            degree[c] += 1;
        }
    }
    h
}

/// Checks at maximal distance from `v` (or not reachable at all), excluding neighbours.
fn unreached_checks(
    h: &SparseBinaryMatrix,
    v: usize,
    seen: &mut [usize],
    seen_var: &mut [usize],
) -> Vec<usize> {
    let checks = h.nrows();
    seen.iter_mut().for_each(|s| *s = usize::MAX);
    seen_var.iter_mut().for_each(|s| *s = usize::MAX);
    seen_var[v] = 0;
    let mut frontier: Vec<usize> = h.col(v).to_vec();
    for &c in &frontier {
        seen[c] = 0;
    }
    let mut reached = frontier.len();
    let mut depth = 0;
    loop {
        let mut next_vars = Vec::new();
        for &c in &frontier {
            for &u in h.row(c) {
                if seen_var[u] == usize::MAX {
                    seen_var[u] = depth + 1;
                    next_vars.push(u);
                }
            }
        }
        let mut next = Vec::new();
        for &u in &next_vars {
            for &c in h.col(u) {
                if seen[c] == usize::MAX {
                    seen[c] = depth + 1;
                    next.push(c);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        if reached + next.len() == checks {
            // the deepest level completes the graph: choose among it
            return next;
        }
        reached += next.len();
        frontier = next;
        depth += 1;
    }
    (0..checks).filter(|&c| seen[c] == usize::MAX).collect()
}

/// First full-rank PEG code obtained from seeds `seed, seed + 1, ...`.
pub fn full_rank_code(n: usize, checks: usize, dv: usize, seed: u64) -> Result<(LdpcCode, u64)> {
    const ATTEMPTS: u64 = 64;
    for s in seed..seed + ATTEMPTS {
        let code = LdpcCode::new(construct(n, checks, dv, s));
        if code.rank() == checks {
            return Ok((code, s));
        }
    }
    Err(Error::RankDeficient {
        rank: 0,
        expected: checks,
    })
}

/// Seed used for the shipped toy codes.
pub const TOY_SEED: u64 = 2018;

/// Rate-2/3 toy code (n = 1008, column weight 3, check degree 9).
pub fn toy_rate_2_3() -> Result<LdpcCode> {
    full_rank_code(1008, 336, 3, TOY_SEED).map(|(c, _)| c)
}

/// Rate-7/12 toy code (n = 1008, column weight 3).
pub fn toy_rate_7_12() -> Result<LdpcCode> {
    full_rank_code(1008, 420, 3, TOY_SEED).map(|(c, _)| c)
}
