//! Constant-composition distribution matching.
//!
//! The matcher reads `k` uniform bits as the binary fraction `u = i / 2^k` and
//! arithmetic-decodes the constant-composition sequence whose interval
//! `[r / M, (r + 1) / M)` contains `u`, where sequences are ranked
//! lexicographically and `M` is the multinomial coefficient. With `2^k ≤ M`
//! every sequence interval holds at most one input point, so the map is
//! injective. All interval arithmetic is exact.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping::AmplitudeDistribution;

/// Occurrence counts over an ordered symbol alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    symbols: Vec<u32>,
    counts: Vec<u64>,
}

impl Composition {
    pub fn new(symbols: Vec<u32>, counts: Vec<u64>) -> Result<Self> {
        if symbols.len() != counts.len() || symbols.is_empty() {
            return Err(Error::Config(
                "composition needs one count per symbol".into(),
            ));
        }
        let mut sorted = symbols.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != symbols.len() {
            return Err(Error::Config("duplicate symbols in composition".into()));
        }
        Ok(Composition { symbols, counts })
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Sequence length `n`.
    pub fn len(&self) -> usize {
        self.counts.iter().sum::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct sequences with this composition.
    pub fn multinomial(&self) -> BigUint {
        let mut total = BigUint::one();
        let mut placed = 0u64;
        for &count in &self.counts {
            for j in 1..=count {
                placed += 1;
                total *= placed;
                total /= j;
            }
        }
        total
    }

    /// `floor(log2 multinomial)`.
    pub fn max_k(&self) -> u64 {
        self.multinomial().bits() - 1
    }

    /// Empirical distribution `n_a / n`.
    pub fn type_probs(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Counts of `sequence` over this composition's alphabet.
    pub fn count_sequence(&self, sequence: &[u32]) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; self.symbols.len()];
        for &s in sequence {
            let idx = self.index_of(s).ok_or(Error::UnknownSymbol(s))?;
            counts[idx] += 1;
        }
        Ok(counts)
    }

    fn index_of(&self, symbol: u32) -> Option<usize> {
        self.symbols.iter().position(|&s| s == symbol)
    }
}

fn type_divergence(counts: &[u64], probs: &[f64], n: f64) -> f64 {
    counts
        .iter()
        .zip(probs)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &p)| {
            if p <= 0.0 {
                f64::INFINITY
            } else {
                let c = c as f64;
                c * (c / (n * p)).log2()
            }
        })
        .sum()
}

/// Length-`n` type closest to `P_A` in divergence `Σ n_a log2(n_a / (n P_A(a)))`.
///
/// Starts from a largest-remainder rounding of `n P_A` and applies single-unit
/// moves while they lower the divergence.
pub fn choose_composition(dist: &AmplitudeDistribution, n: usize) -> Composition {
    assert!(n >= 1, "composition length must be positive");
    let probs = &dist.probs;
    let nf = n as f64;
    let mut counts: Vec<u64> = probs.iter().map(|&p| (nf * p).floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = nf * probs[a] - (nf * probs[a]).floor();
        let fb = nf * probs[b] - (nf * probs[b]).floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in order.iter().take((n as u64 - assigned) as usize) {
        counts[i] += 1;
    }

    let mut current = type_divergence(&counts, probs, nf);
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for from in 0..counts.len() {
            if counts[from] == 0 {
                continue;
            }
            for to in 0..counts.len() {
                if to == from || probs[to] <= 0.0 {
                    continue;
                }
                counts[from] -= 1;
                counts[to] += 1;
                let d = type_divergence(&counts, probs, nf);
                counts[from] += 1;
                counts[to] -= 1;
                if d < current - 1e-12 && best.is_none_or(|(_, _, b)| d < b) {
                    best = Some((from, to, d));
                }
            }
        }
        match best {
            Some((from, to, d)) => {
                counts[from] -= 1;
                counts[to] += 1;
                current = d;
            }
            None => break,
        }
    }
    Composition {
        symbols: dist.amplitudes.clone(),
        counts,
    }
}

/// `floor(log2 multinomial(n; counts))`, computed exactly.
pub fn derive_k(composition: &Composition) -> u64 {
    composition.max_k()
}

/// A fixed-to-fixed matcher: `k` bits in, `n` symbols of one composition out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatcherSpec {
    composition: Composition,
    k: u64,
    multinomial: BigUint,
}

impl MatcherSpec {
    /// Matcher with the largest admissible input length.
    pub fn new(composition: Composition) -> Self {
        let multinomial = composition.multinomial();
        let k = multinomial.bits() - 1;
        MatcherSpec {
            composition,
            k,
            multinomial,
        }
    }

    pub fn with_k(composition: Composition, k: u64) -> Result<Self> {
        let mut spec = Self::new(composition);
        if k > spec.k {
            return Err(Error::InvalidK { k, max: spec.k });
        }
        spec.k = k;
        Ok(spec)
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn n(&self) -> usize {
        self.composition.len()
    }

    /// Matcher rate `k / n` in bits per symbol.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    /// Maps `k` bits (MSB first) to a constant-composition sequence.
    pub fn match_bits(&self, bits: &[u8]) -> Result<Vec<u32>> {
        if bits.len() as u64 != self.k {
            return Err(Error::InputLength {
                expected: self.k as usize,
                got: bits.len(),
            });
        }
        let index = bits_to_uint(bits);
        let mut rank = (index * &self.multinomial) >> self.k;

        let symbols = &self.composition.symbols;
        let mut remaining_counts = self.composition.counts.clone();
        let mut remaining = self.n() as u64;
        let mut block = self.multinomial.clone();
        let mut out = Vec::with_capacity(self.n());
        while remaining > 0 {
            let live: Vec<usize> = (0..symbols.len())
                .filter(|&a| remaining_counts[a] > 0)
                .collect();
            if live.len() == 1 {
                let a = live[0];
                out.extend(std::iter::repeat_n(symbols[a], remaining_counts[a] as usize));
                break;
            }
            for &a in &live {
                let width = &block * remaining_counts[a] / remaining;
                if rank < width {
                    out.push(symbols[a]);
                    block = width;
                    remaining_counts[a] -= 1;
                    remaining -= 1;
                    break;
                }
                rank -= width;
            }
        }
        Ok(out)
    }

    /// Inverse of [`MatcherSpec::match_bits`].
    pub fn dematch(&self, sequence: &[u32]) -> Result<Vec<u8>> {
        let got = self.composition.count_sequence(sequence)?;
        if got != self.composition.counts {
            return Err(Error::CompositionMismatch {
                expected: self.composition.counts.clone(),
                got,
            });
        }
        let symbols = &self.composition.symbols;
        let mut remaining_counts = self.composition.counts.clone();
        let mut remaining = self.n() as u64;
        let mut block = self.multinomial.clone();
        let mut rank = BigUint::zero();
        for &s in sequence {
            let target = self.composition.index_of(s).expect("counted above");
            for a in 0..symbols.len() {
                if remaining_counts[a] == 0 {
                    continue;
                }
                let width = &block * remaining_counts[a] / remaining;
                if a == target {
                    block = width;
                    break;
                }
                rank += width;
            }
            remaining_counts[target] -= 1;
            remaining -= 1;
        }
        // smallest i with floor(i M / 2^k) >= rank
        let scaled = rank.clone() << self.k;
        let mut index = &scaled / &self.multinomial;
        if &index * &self.multinomial != scaled {
            index += 1u32;
        }
        if index.bits() > self.k || ((&index * &self.multinomial) >> self.k) != rank {
            return Err(Error::NotInCodebook);
        }
        Ok(uint_to_bits(&index, self.k as usize))
    }
}

fn bits_to_uint(bits: &[u8]) -> BigUint {
    if bits.is_empty() {
        return BigUint::zero();
    }
    BigUint::from_radix_be(bits, 2).expect("bits are 0 or 1")
}

fn uint_to_bits(value: &BigUint, len: usize) -> Vec<u8> {
    let digits = if value.is_zero() {
        Vec::new()
    } else {
        value.to_radix_be(2)
    };
    let mut out = vec![0u8; len - digits.len()];
    out.extend(digits);
    out
}
