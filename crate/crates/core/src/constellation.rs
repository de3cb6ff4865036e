//! Bipolar ASK alphabets, amplitude/sign factorization and binary labelings.
//!
//! A point `x` carries the `m`-bit label `b(sign(x)) b(|x|)`: the sign bit comes
//! first (`b(-1) = 0`, `b(+1) = 1`) followed by the `m - 1` bit amplitude label,
//! most significant bit first. Bit level `i` (1-based) of a label is therefore
//! bit `m - i` of the integer label.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping::ShapedInput;

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelingKind {
    Natural,
    Brgc,
}

impl std::str::FromStr for LabelingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "natural" => Ok(Self::Natural),
            "brgc" | "gray" => Ok(Self::Brgc),
            other => Err(Error::Config(format!("unknown labeling {other:?}"))),
        }
    }
}

/// Amplitude label table, indexed by amplitude in descending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    kind: LabelingKind,
    table: Vec<u16>,
}

impl Labeling {
    fn new(kind: LabelingKind, amp_bits: u32) -> Self {
        let count = 1u16 << amp_bits;
        let table = (0..count)
            .map(|i| match kind {
                LabelingKind::Natural => i,
                LabelingKind::Brgc => i ^ (i >> 1),
            })
            .collect();
        Labeling { kind, table }
    }

    pub fn kind(&self) -> LabelingKind {
        self.kind
    }

    /// Label of the `i`-th amplitude in descending order.
    pub fn table(&self) -> &[u16] {
        &self.table
    }
}

/// A `2^m`-point bipolar ASK constellation `{±1, ±3, …, ±(2^m − 1)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AskConstellation {
    m: u32,
    points: Vec<i32>,
    amplitudes: Vec<u32>,
    labeling: Labeling,
    point_labels: Vec<u16>,
    label_to_point: Vec<usize>,
}

impl AskConstellation {
    pub fn new(m: u32, kind: LabelingKind) -> Result<Self> {
        if !(MIN_BITS..=MAX_BITS).contains(&m) {
            return Err(Error::BitsPerSymbol(m));
        }
        let top = (1i32 << m) - 1;
        let points: Vec<i32> = (-top..=top).step_by(2).collect();
        let amplitudes: Vec<u32> = (1..=top as u32).rev().step_by(2).collect();
        let labeling = Labeling::new(kind, m - 1);

        let mut point_labels = Vec::with_capacity(points.len());
        for &x in &points {
            let amp_idx = amplitudes
                .iter()
                .position(|&a| a == x.unsigned_abs())
                .expect("odd amplitude");
            let sign_bit = u16::from(x > 0);
            point_labels.push((sign_bit << (m - 1)) | labeling.table[amp_idx]);
        }
        let mut label_to_point = vec![0; points.len()];
        for (idx, &l) in point_labels.iter().enumerate() {
            label_to_point[l as usize] = idx;
        }
        Ok(AskConstellation {
            m,
            points,
            amplitudes,
            labeling,
            point_labels,
            label_to_point,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Signal points in ascending order.
    pub fn points(&self) -> &[i32] {
        &self.points
    }

    /// Amplitudes in descending order, largest first.
    pub fn amplitudes(&self) -> &[u32] {
        &self.amplitudes
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_amplitudes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn point_index(&self, x: i32) -> Option<usize> {
        if x % 2 == 0 || x.unsigned_abs() > self.max_amplitude() {
            return None;
        }
        Some(((x + self.max_amplitude() as i32) / 2) as usize)
    }

    pub fn max_amplitude(&self) -> u32 {
        self.amplitudes[0]
    }

    /// Full `m`-bit label of the point at `index` (ascending point order).
    pub fn point_label(&self, index: usize) -> u16 {
        self.point_labels[index]
    }

    pub fn point_labels(&self) -> &[u16] {
        &self.point_labels
    }

    pub fn label(&self, x: i32) -> Option<u16> {
        self.point_index(x).map(|i| self.point_labels[i])
    }

    /// Point index carrying the given full label.
    pub fn point_of_label(&self, label: u16) -> usize {
        self.label_to_point[label as usize]
    }

    /// `(m − 1)`-bit label of an amplitude.
    pub fn amplitude_label(&self, a: u32) -> Result<u16> {
        self.amplitudes
            .iter()
            .position(|&v| v == a)
            .map(|i| self.labeling.table[i])
            .ok_or(Error::AlphabetViolation(a))
    }

    pub fn amplitude_of_label(&self, label: u16) -> u32 {
        let idx = self
            .labeling
            .table
            .iter()
            .position(|&l| l == label)
            .expect("label in range");
        self.amplitudes[idx]
    }

    /// Second moment of the uniform distribution over the (unscaled) points.
    pub fn uniform_second_moment(&self) -> f64 {
        ((1u64 << (2 * self.m)) - 1) as f64 / 3.0
    }
}

/// Bit at 1-based `level` of an `m`-bit label.
#[inline]
pub fn label_bit(label: u16, level: usize, m: u32) -> u8 {
    ((label >> (m as usize - level)) & 1) as u8
}

/// Maps two real ASK symbols to one QAM symbol `Δ(x1 + j x2)`.
pub fn qam_pair(x1: i32, x2: i32, delta: f64) -> Complex64 {
    Complex64::new(delta * x1 as f64, delta * x2 as f64)
}

/// Marginal prior `(P(B_i = 0), P(B_i = 1))` of bit level `level`.
pub fn bit_level_prior(input: &ShapedInput, level: usize) -> Result<(f64, f64)> {
    let c = input.constellation();
    let m = c.m();
    if level == 0 || level > m as usize {
        return Err(Error::BitLevel { level, m });
    }
    let sum: f64 = input.probs().iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized(sum));
    }
    if level == 1 && input.is_symmetric() {
        return Ok((0.5, 0.5));
    }
    let mut p = [0.0; 2];
    for (idx, &px) in input.probs().iter().enumerate() {
        p[label_bit(c.point_label(idx), level, m) as usize] += px;
    }
    Ok((p[0], p[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(label: u16, m: u32) -> String {
        (1..=m as usize)
            .map(|l| char::from(b'0' + label_bit(label, l, m)))
            .collect()
    }

    #[test]
    fn four_ask_brgc() {
        let c = AskConstellation::new(2, LabelingKind::Brgc).unwrap();
        assert_eq!(c.points(), &[-3, -1, 1, 3]);
        assert_eq!(c.amplitudes(), &[3, 1]);
        assert_eq!(c.labeling().table(), &[0, 1]);
    }

    #[test]
    fn eight_ask_table_labels() {
        let g = AskConstellation::new(3, LabelingKind::Brgc).unwrap();
        let amp: Vec<String> = g
            .amplitudes()
            .iter()
            .map(|&a| format!("{:02b}", g.amplitude_label(a).unwrap()))
            .collect();
        assert_eq!(amp, ["00", "01", "11", "10"]);
        let pts: Vec<String> = (0..8).map(|i| bits(g.point_label(i), 3)).collect();
        assert_eq!(
            pts,
            ["000", "001", "011", "010", "110", "111", "101", "100"]
        );

        let n = AskConstellation::new(3, LabelingKind::Natural).unwrap();
        let pts: Vec<String> = (0..8).map(|i| bits(n.point_label(i), 3)).collect();
        assert_eq!(
            pts,
            ["000", "001", "010", "011", "111", "110", "101", "100"]
        );
    }

    #[test]
    fn labels_are_bijective_and_sign_first() {
        for m in MIN_BITS..=MAX_BITS {
            for kind in [LabelingKind::Natural, LabelingKind::Brgc] {
                let c = AskConstellation::new(m, kind).unwrap();
                let mut seen = vec![false; c.num_points()];
                for (i, &x) in c.points().iter().enumerate() {
                    let l = c.point_label(i);
                    assert!(!seen[l as usize]);
                    seen[l as usize] = true;
                    assert_eq!(label_bit(l, 1, m), u8::from(x > 0));
                    assert_eq!(c.point_of_label(l), i);
                    let amp_label = l & ((1 << (m - 1)) - 1);
                    assert_eq!(c.amplitude_of_label(amp_label), x.unsigned_abs());
                }
            }
        }
    }

    #[test]
    fn brgc_amplitudes_induce_gray_points() {
        for m in MIN_BITS..=MAX_BITS {
            let c = AskConstellation::new(m, LabelingKind::Brgc).unwrap();
            for i in 1..c.num_points() {
                let d = c.point_label(i) ^ c.point_label(i - 1);
                assert_eq!(d.count_ones(), 1, "m={m} i={i}");
            }
        }
    }

    #[test]
    fn rejects_out_of_range_m() {
        assert!(matches!(
            AskConstellation::new(1, LabelingKind::Brgc),
            Err(Error::BitsPerSymbol(1))
        ));
        assert!(AskConstellation::new(9, LabelingKind::Natural).is_err());
    }

    #[test]
    fn qam_examples() {
        assert_eq!(qam_pair(1, -1, 1.0), Complex64::new(1.0, -1.0));
        assert_eq!(qam_pair(3, 3, 0.5), Complex64::new(1.5, 1.5));
        assert_eq!(qam_pair(-7, 5, 2.0), Complex64::new(-14.0, 10.0));
        let s = qam_pair(-7, 5, 2.0);
        assert_eq!(s.norm_sqr(), 4.0 * 49.0 + 4.0 * 25.0);
    }

    #[test]
    fn bit_level_prior_examples() {
        let c = AskConstellation::new(2, LabelingKind::Brgc).unwrap();
        let input = ShapedInput::maxwell_boltzmann(&c, 3f64.ln() / 8.0, 1.0);
        assert!((input.probs()[0] - 0.125).abs() < 1e-12);
        assert_eq!(bit_level_prior(&input, 1).unwrap(), (0.5, 0.5));
        let (p0, p1) = bit_level_prior(&input, 2).unwrap();
        assert!((p0 - 0.25).abs() < 1e-12 && (p1 - 0.75).abs() < 1e-12);
        let uniform = ShapedInput::uniform(&AskConstellation::new(4, LabelingKind::Natural).unwrap(), 1.0);
        for level in 1..=4 {
            let (p0, p1) = bit_level_prior(&uniform, level).unwrap();
            assert!((p0 - 0.5).abs() < 1e-12 && (p1 - 0.5).abs() < 1e-12);
        }
        assert!(bit_level_prior(&input, 3).is_err());
    }
}
