//! PAS transceiver, bitwise demapper and a uniform BICM baseline.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::ccdm::{choose_composition, MatcherSpec};
use crate::constellation::{label_bit, AskConstellation};
use crate::error::{Error, Result};
use crate::ldpc::{BpDecoder, SystematicCode};
use crate::numeric::{db_to_linear, linear_to_db};
use crate::shaping::{lambda_shift, optimize_input, solve_rate, AmplitudeDistribution, ShapedInput};

/// Default belief-propagation iteration budget.
pub const DEFAULT_MAX_ITER: usize = 100;

/// Fraction `γ = 1 − (1 − c) m` of sign positions that carry data.
pub fn gamma_of(c: Rational64, m: u32) -> Result<Rational64> {
    let one = Rational64::one();
    let gamma = one - (one - c) * Rational64::from_integer(m as i64);
    if c >= one || gamma < Rational64::zero() {
        return Err(Error::UnsupportedRate {
            rate: c.to_string(),
            m,
            reason: format!("PAS requires {}/{} <= c < 1", m - 1, m),
        });
    }
    Ok(gamma)
}

fn ratio(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Placement of the amplitude bit levels in the systematic part.
///
/// `level_order[j]` is the level (2..=m) whose `n_c` bits fill block `j`.
/// The sign level 1 always occupies the final block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMapper {
    level_order: Vec<usize>,
}

impl BitMapper {
    pub fn new(level_order: Vec<usize>, m: u32) -> Result<Self> {
        let mut sorted = level_order.clone();
        sorted.sort_unstable();
        if sorted != (2..=m as usize).collect::<Vec<_>>() {
            return Err(Error::InvalidBitMapper(level_order));
        }
        Ok(BitMapper { level_order })
    }

    /// `(m, m − 1, …, 2)`: least reliable levels first.
    pub fn descending(m: u32) -> Self {
        BitMapper {
            level_order: (2..=m as usize).rev().collect(),
        }
    }

    /// All `(m − 1)!` mappers in lexicographic order.
    pub fn all(m: u32) -> Vec<Self> {
        let mut current: Vec<usize> = (2..=m as usize).collect();
        let mut out = vec![BitMapper {
            level_order: current.clone(),
        }];
        while next_permutation(&mut current) {
            out.push(BitMapper {
                level_order: current.clone(),
            });
        }
        out
    }

    pub fn m(&self) -> u32 {
        self.level_order.len() as u32 + 1
    }

    pub fn level_order(&self) -> &[usize] {
        &self.level_order
    }

    /// Block index of `level` within the codeword (sign level last).
    pub fn block_of(&self, level: usize) -> usize {
        if level == 1 {
            return self.level_order.len();
        }
        self.level_order
            .iter()
            .position(|&l| l == level)
            .expect("level in range")
    }

    /// Concatenates per-level bit rows (`levels[i]` holds level `i + 2`).
    pub fn apply(&self, levels: &[Vec<u8>]) -> Vec<u8> {
        self.level_order
            .iter()
            .flat_map(|&l| levels[l - 2].iter().copied())
            .collect()
    }

    /// Inverse of [`BitMapper::apply`].
    pub fn invert(&self, part: &[u8]) -> Vec<Vec<u8>> {
        let n_c = part.len() / self.level_order.len().max(1);
        let mut levels = vec![Vec::new(); self.level_order.len()];
        for (block, &l) in self.level_order.iter().enumerate() {
            levels[l - 2] = part[block * n_c..(block + 1) * n_c].to_vec();
        }
        levels
    }
}

impl fmt::Display for BitMapper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .level_order
            .iter()
            .chain(std::iter::once(&1))
            .map(usize::to_string)
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for BitMapper {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut levels = s
            .trim()
            .trim_start_matches('(')
            .trim_end_matches(')')
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Config(format!("bit-mapper {s:?}: {e}")))?;
        if levels.last() == Some(&1) {
            levels.pop();
        }
        let m = levels.len() as u32 + 1;
        Self::new(levels, m)
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Per-level LLRs `log(P(b=0|y)/P(b=1|y))` for each received sample.
///
/// `out[level - 1][j]` is the LLR of level `level` at symbol `j`.
pub fn bitwise_llrs(input: &ShapedInput, y: &[f64]) -> Vec<Vec<f64>> {
    let c = input.constellation();
    let m = c.m();
    let delta = input.delta();
    let log_prior: Vec<f64> = input.probs().iter().map(|p| p.ln()).collect();
    let labels = c.point_labels();
    let points = c.points();
    let mut out = vec![vec![0.0; y.len()]; m as usize];
    let mut metric = vec![0.0; points.len()];
    for (j, &yj) in y.iter().enumerate() {
        for (i, &x) in points.iter().enumerate() {
            let d = yj - delta * x as f64;
            metric[i] = log_prior[i] - 0.5 * d * d;
        }
        for level in 1..=m as usize {
            let (mut top0, mut top1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (i, &v) in metric.iter().enumerate() {
                if label_bit(labels[i], level, m) == 0 {
                    top0 = top0.max(v);
                } else {
                    top1 = top1.max(v);
                }
            }
            let (mut s0, mut s1) = (0.0, 0.0);
            for (i, &v) in metric.iter().enumerate() {
                if label_bit(labels[i], level, m) == 0 {
                    s0 += (v - top0).exp();
                } else {
                    s1 += (v - top1).exp();
                }
            }
            out[level - 1][j] = (top0 + s0.ln()) - (top1 + s1.ln());
        }
    }
    out
}

/// A transmitted PAS frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedFrame {
    pub amplitudes: Vec<u32>,
    pub sign_data: Vec<u8>,
    pub codeword: Vec<u8>,
    pub points: Vec<i32>,
    pub symbols: Vec<f64>,
}

/// Receiver estimates before dematching.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PasEstimate {
    pub amplitudes: Vec<u32>,
    pub sign_data: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// A link that carries a fixed number of data bits per frame.
pub trait Link: Sync {
    fn id(&self) -> &str;
    fn data_bits(&self) -> usize;
    /// Channel uses per frame.
    fn frame_len(&self) -> usize;
    /// Data bits per channel use.
    fn rate(&self) -> f64 {
        self.data_bits() as f64 / self.frame_len() as f64
    }
    /// Design input, scaled to the current SNR.
    fn design(&self) -> &ShapedInput;
    fn gamma(&self) -> f64;
    fn transmit(&self, data: &[u8]) -> Result<Vec<f64>>;
    fn receive(&self, y: &[f64]) -> Result<Vec<u8>>;
    fn at_snr_db(&self, snr_db: f64) -> Self
    where
        Self: Sized;
    fn snr_db(&self) -> f64 {
        linear_to_db(self.design().power())
    }
}

/// Probabilistic amplitude shaping with a systematic binary code.
#[derive(Clone, Debug)]
pub struct PasMode {
    id: String,
    code: Arc<SystematicCode>,
    n_c: usize,
    gamma: Rational64,
    bitmapper: BitMapper,
    matcher: MatcherSpec,
    design: ShapedInput,
    amplitude_of_label: Vec<u32>,
    max_iter: usize,
}

impl PasMode {
    /// `design` is the amplitude distribution assumed by the demapper.
    pub fn new(
        constellation: &AskConstellation,
        code: Arc<SystematicCode>,
        design: &AmplitudeDistribution,
        matcher: MatcherSpec,
        bitmapper: BitMapper,
    ) -> Result<Self> {
        let m = constellation.m();
        let (n, k) = (code.n(), code.k());
        let c = Rational64::new(k as i64, n as i64);
        if n % m as usize != 0 {
            return Err(Error::UnsupportedRate {
                rate: c.to_string(),
                m,
                reason: format!("code length {n} is not a multiple of m"),
            });
        }
        let n_c = n / m as usize;
        let gamma = gamma_of(c, m)?;
        if !(gamma * Rational64::from_integer(n_c as i64)).is_integer() {
            return Err(Error::UnsupportedRate {
                rate: c.to_string(),
                m,
                reason: format!("γ n_c = {gamma} · {n_c} is not an integer"),
            });
        }
        if bitmapper.m() != m {
            return Err(Error::InvalidBitMapper(bitmapper.level_order.clone()));
        }
        if matcher.n() != n_c {
            return Err(Error::Config(format!(
                "matcher length {} differs from n_c = {n_c}",
                matcher.n()
            )));
        }
        for &a in matcher.composition().symbols() {
            constellation.amplitude_label(a)?;
        }
        let mut amplitude_of_label = vec![0; constellation.num_amplitudes()];
        for &a in constellation.amplitudes() {
            amplitude_of_label[constellation.amplitude_label(a)? as usize] = a;
        }
        let design = ShapedInput::from_amplitudes(constellation, design, 1.0)?;
        Ok(PasMode {
            id: format!("{}-ASK PAS c={c}", constellation.num_points()),
            code,
            n_c,
            gamma,
            bitmapper,
            matcher,
            design,
            amplitude_of_label,
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.design = self.design.with_delta(delta);
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_bitmapper(mut self, bitmapper: BitMapper) -> Result<Self> {
        if bitmapper.m() != self.constellation().m() {
            return Err(Error::InvalidBitMapper(bitmapper.level_order));
        }
        self.bitmapper = bitmapper;
        Ok(self)
    }

    pub fn constellation(&self) -> &AskConstellation {
        self.design.constellation()
    }

    pub fn code(&self) -> &Arc<SystematicCode> {
        &self.code
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    pub fn gamma_ratio(&self) -> Rational64 {
        self.gamma
    }

    /// Number of sign positions that carry data, `γ n_c`.
    pub fn sign_data_bits(&self) -> usize {
        (self.gamma * Rational64::from_integer(self.n_c as i64)).to_integer() as usize
    }

    pub fn bitmapper(&self) -> &BitMapper {
        &self.bitmapper
    }

    pub fn matcher(&self) -> &MatcherSpec {
        &self.matcher
    }

    pub fn delta(&self) -> f64 {
        self.design.delta()
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }

    /// Design transmission rate `H(A) + γ`.
    pub fn design_rate(&self) -> f64 {
        self.design.amplitude_entropy() + ratio(self.gamma)
    }

    fn level_bit(&self, amplitude_label: u16, level: usize) -> u8 {
        label_bit(amplitude_label, level - 1, self.constellation().m() - 1)
    }

    /// Codeword `[interleaved amplitude levels | sign data | parity]` and the scaled symbols.
    pub fn pas_encode(&self, amplitudes: &[u32], sign_data: &[u8]) -> Result<EncodedFrame> {
        let c = self.constellation();
        let m = c.m() as usize;
        if amplitudes.len() != self.n_c {
            return Err(Error::InputLength {
                expected: self.n_c,
                got: amplitudes.len(),
            });
        }
        if sign_data.len() != self.sign_data_bits() {
            return Err(Error::InputLength {
                expected: self.sign_data_bits(),
                got: sign_data.len(),
            });
        }
        let labels = amplitudes
            .iter()
            .map(|&a| c.amplitude_label(a))
            .collect::<Result<Vec<u16>>>()?;
        let levels: Vec<Vec<u8>> = (2..=m)
            .map(|l| labels.iter().map(|&lab| self.level_bit(lab, l)).collect())
            .collect();
        let mut data = self.bitmapper.apply(&levels);
        data.extend_from_slice(sign_data);
        let codeword = self.code.encode(&data)?;
        let signs = &codeword[(m - 1) * self.n_c..];
        let points: Vec<i32> = amplitudes
            .iter()
            .zip(signs)
            .map(|(&a, &b)| if b == 1 { a as i32 } else { -(a as i32) })
            .collect();
        let delta = self.delta();
        let symbols = points.iter().map(|&x| delta * x as f64).collect();
        Ok(EncodedFrame {
            amplitudes: amplitudes.to_vec(),
            sign_data: sign_data.to_vec(),
            codeword,
            points,
            symbols,
        })
    }

    /// Bitwise LLRs in codeword order.
    pub fn demap(&self, y: &[f64]) -> Vec<f64> {
        let per_level = bitwise_llrs(&self.design, y);
        let m = self.constellation().m() as usize;
        let mut llrs = vec![0.0; m * self.n_c];
        for (idx, level_llrs) in per_level.iter().enumerate() {
            let block = self.bitmapper.block_of(idx + 1);
            llrs[block * self.n_c..(block + 1) * self.n_c].copy_from_slice(level_llrs);
        }
        llrs
    }

    /// Demaps, decodes and recovers amplitudes and sign data.
    pub fn pas_decode(&self, y: &[f64]) -> PasEstimate {
        let llrs = self.demap(y);
        let out = BpDecoder::new(self.code.graph()).decode(&llrs, self.max_iter);
        self.estimate_from_bits(&out.bits, out.converged, out.iterations)
    }

    fn estimate_from_bits(&self, bits: &[u8], converged: bool, iterations: usize) -> PasEstimate {
        let m = self.constellation().m() as usize;
        let levels = self.bitmapper.invert(&bits[..(m - 1) * self.n_c]);
        let amplitudes = (0..self.n_c)
            .map(|j| {
                let label = (2..=m).fold(0u16, |acc, l| (acc << 1) | levels[l - 2][j] as u16);
                self.amplitude_of_label[label as usize]
            })
            .collect();
        let start = (m - 1) * self.n_c;
        PasEstimate {
            amplitudes,
            sign_data: bits[start..start + self.sign_data_bits()].to_vec(),
            converged,
            iterations,
        }
    }

    /// Splits data into matcher bits and sign bits, then encodes.
    pub fn encode_frame(&self, data: &[u8]) -> Result<EncodedFrame> {
        if data.len() != self.data_bits() {
            return Err(Error::InputLength {
                expected: self.data_bits(),
                got: data.len(),
            });
        }
        let k = self.matcher.k() as usize;
        let amplitudes = self.matcher.match_bits(&data[..k])?;
        self.pas_encode(&amplitudes, &data[k..])
    }

    /// Full receiver: the data bits, or the dematcher error.
    pub fn decode_frame(&self, y: &[f64]) -> Result<Vec<u8>> {
        let est = self.pas_decode(y);
        let mut data = self.matcher.dematch(&est.amplitudes)?;
        data.extend_from_slice(&est.sign_data);
        Ok(data)
    }

    /// Detailed record of one frame through the channel output `y`.
    pub fn trace(&self, data: &[u8], y: &[f64]) -> Result<FrameTrace> {
        let encoded = self.encode_frame(data)?;
        let llrs = self.demap(y);
        let out = BpDecoder::new(self.code.graph()).decode(&llrs, self.max_iter);
        let est = self.estimate_from_bits(&out.bits, out.converged, out.iterations);
        let decoded = self.matcher.dematch(&est.amplitudes).map(|mut d| {
            d.extend_from_slice(&est.sign_data);
            d
        });
        let frame_error = decoded.as_ref().map_or(true, |d| d != data);
        Ok(FrameTrace {
            mode: self.id.clone(),
            snr_db: self.snr_db(),
            data: data.to_vec(),
            encoded,
            received: y.to_vec(),
            llrs,
            hard_decision: out.bits,
            estimate: est,
            decoded: decoded.as_ref().ok().cloned(),
            dematch_error: decoded.err().map(|e| e.to_string()),
            frame_error,
        })
    }
}

impl Link for PasMode {
    fn id(&self) -> &str {
        &self.id
    }

    /// `k_c`: matcher bits plus data-carrying signs.
    fn data_bits(&self) -> usize {
        self.matcher.k() as usize + self.sign_data_bits()
    }

    fn frame_len(&self) -> usize {
        self.n_c
    }

    fn design(&self) -> &ShapedInput {
        &self.design
    }

    fn gamma(&self) -> f64 {
        ratio(self.gamma)
    }

    fn transmit(&self, data: &[u8]) -> Result<Vec<f64>> {
        self.encode_frame(data).map(|f| f.symbols)
    }

    fn receive(&self, y: &[f64]) -> Result<Vec<u8>> {
        self.decode_frame(y)
    }

    fn at_snr_db(&self, snr_db: f64) -> Self {
        let mut mode = self.clone();
        mode.design = mode.design.with_power(db_to_linear(snr_db));
        mode
    }
}

/// Everything observed for one frame, for debugging dumps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrameTrace {
    pub mode: String,
    pub snr_db: f64,
    pub data: Vec<u8>,
    pub encoded: EncodedFrame,
    pub received: Vec<f64>,
    pub llrs: Vec<f64>,
    pub hard_decision: Vec<u8>,
    pub estimate: PasEstimate,
    pub decoded: Option<Vec<u8>>,
    pub dematch_error: Option<String>,
    pub frame_error: bool,
}

/// Ingredients from which PAS modes are built at any operating point.
#[derive(Clone, Debug)]
pub struct PasDesign {
    pub constellation: AskConstellation,
    pub code: Arc<SystematicCode>,
    pub bitmapper: BitMapper,
}

impl PasDesign {
    pub fn new(constellation: AskConstellation, code: Arc<SystematicCode>) -> Self {
        let bitmapper = BitMapper::descending(constellation.m());
        PasDesign {
            constellation,
            code,
            bitmapper,
        }
    }

    pub fn n_c(&self) -> usize {
        self.code.n() / self.constellation.m() as usize
    }

    pub fn gamma(&self) -> Result<Rational64> {
        gamma_of(
            Rational64::new(self.code.k() as i64, self.code.n() as i64),
            self.constellation.m(),
        )
    }

    /// Mode matched to the MI-maximizing input at `snr_db`.
    pub fn optimal_mode(&self, snr_db: f64) -> Result<PasMode> {
        let input = optimize_input(&self.constellation, db_to_linear(snr_db))?;
        self.mode_with(input.amplitude_distribution(), None)
            .map(|m| m.at_snr_db(snr_db))
    }

    /// Mode whose amplitudes follow `dist`; the matcher carries `k` bits or
    /// the largest admissible number when `k` is `None`.
    pub fn mode_with(&self, dist: &AmplitudeDistribution, k: Option<u64>) -> Result<PasMode> {
        let composition = choose_composition(dist, self.n_c());
        let matcher = match k {
            Some(k) => MatcherSpec::with_k(composition, k)?,
            None => MatcherSpec::new(composition),
        };
        PasMode::new(
            &self.constellation,
            Arc::clone(&self.code),
            dist,
            matcher,
            self.bitmapper.clone(),
        )
    }

    /// Mode transmitting `round(rate · n_c)` data bits per frame, with
    /// amplitudes from the λ-family of `reference`.
    pub fn mode_for_rate(&self, reference: &AmplitudeDistribution, rate: f64) -> Result<PasMode> {
        let n_c = self.n_c();
        let gamma = ratio(self.gamma()?);
        let sign_bits = (self.gamma()? * Rational64::from_integer(n_c as i64)).to_integer();
        let k = ((rate * n_c as f64).round() as i64 - sign_bits).max(0) as u64;
        let max_entropy = (reference.amplitudes.len() as f64).log2();
        let mut entropy = k as f64 / n_c as f64;
        loop {
            let lambda = solve_rate(reference, gamma, (entropy + gamma).min(max_entropy + gamma))?;
            let dist = lambda_shift(reference, lambda);
            let composition = choose_composition(&dist, n_c);
            if composition.max_k() >= k {
                return self.mode_with(&dist, Some(k));
            }
            if entropy >= max_entropy {
                return Err(Error::InfeasibleRate {
                    rate,
                    min: gamma,
                    max: max_entropy + gamma,
                });
            }
            entropy = (entropy + 1e-3).min(max_entropy);
        }
    }
}

/// Simulated error rates of every bit-mapper candidate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BitMapperReport {
    pub best: BitMapper,
    pub candidates: Vec<(BitMapper, crate::sim::OperatingPoint)>,
}

/// Exhaustive search over the `(m − 1)!` level orders at one SNR.
///
/// Ties go to the lexicographically smallest order. With a single candidate
/// nothing is simulated.
pub fn optimize_bitmapper(
    mode: &PasMode,
    snr_db: f64,
    stop: crate::sim::StopRule,
    seed: u64,
) -> Result<BitMapperReport> {
    let all = BitMapper::all(mode.constellation().m());
    if all.len() == 1 {
        return Ok(BitMapperReport {
            best: all[0].clone(),
            candidates: Vec::new(),
        });
    }
    let mut candidates = Vec::with_capacity(all.len());
    for mapper in all {
        let candidate = mode.clone().with_bitmapper(mapper.clone())?;
        let point = crate::sim::run_fer(&candidate, snr_db, stop, seed);
        candidates.push((mapper, point));
    }
    let best = candidates
        .iter()
        .fold(None::<&(BitMapper, crate::sim::OperatingPoint)>, |best, c| match best {
            Some(b) if b.1.fer <= c.1.fer => Some(b),
            _ => Some(c),
        })
        .map(|(m, _)| m.clone())
        .expect("at least two candidates");
    Ok(BitMapperReport { best, candidates })
}

/// Bit-interleaved coded modulation with uniform inputs.
///
/// Codeword bits are placed level by level in blocks of `n_c`, in the order
/// given by `level_order` (a permutation of `1..=m`).
#[derive(Clone, Debug)]
pub struct BicmMode {
    id: String,
    code: Arc<SystematicCode>,
    n_c: usize,
    level_order: Vec<usize>,
    design: ShapedInput,
    max_iter: usize,
}

impl BicmMode {
    pub fn new(constellation: &AskConstellation, code: Arc<SystematicCode>) -> Result<Self> {
        let m = constellation.m() as usize;
        if code.n() % m != 0 {
            return Err(Error::UnsupportedRate {
                rate: format!("{}/{}", code.k(), code.n()),
                m: m as u32,
                reason: format!("code length {} is not a multiple of m", code.n()),
            });
        }
        Ok(BicmMode {
            id: format!(
                "{}-ASK uniform BICM c={}",
                constellation.num_points(),
                Rational64::new(code.k() as i64, code.n() as i64)
            ),
            n_c: code.n() / m,
            code,
            level_order: (1..=m).rev().collect(),
            design: ShapedInput::uniform(constellation, 1.0),
            max_iter: DEFAULT_MAX_ITER,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn code(&self) -> &Arc<SystematicCode> {
        &self.code
    }
}

impl Link for BicmMode {
    fn id(&self) -> &str {
        &self.id
    }

    fn data_bits(&self) -> usize {
        self.code.k()
    }

    fn frame_len(&self) -> usize {
        self.n_c
    }

    fn design(&self) -> &ShapedInput {
        &self.design
    }

    fn gamma(&self) -> f64 {
        1.0
    }

    fn transmit(&self, data: &[u8]) -> Result<Vec<f64>> {
        let codeword = self.code.encode(data)?;
        let c = self.design.constellation();
        let points = c.points();
        let delta = self.design.delta();
        Ok((0..self.n_c)
            .map(|j| {
                let label = self
                    .level_order
                    .iter()
                    .enumerate()
                    .fold(0u16, |acc, (block, &level)| {
                        acc | (codeword[block * self.n_c + j] as u16) << (c.m() as usize - level)
                    });
                delta * points[c.point_of_label(label)] as f64
            })
            .collect())
    }

    fn receive(&self, y: &[f64]) -> Result<Vec<u8>> {
        let per_level = bitwise_llrs(&self.design, y);
        let mut llrs = vec![0.0; self.code.n()];
        for (block, &level) in self.level_order.iter().enumerate() {
            llrs[block * self.n_c..(block + 1) * self.n_c].copy_from_slice(&per_level[level - 1]);
        }
        let out = BpDecoder::new(self.code.graph()).decode(&llrs, self.max_iter);
        Ok(out.bits[..self.code.k()].to_vec())
    }

    fn at_snr_db(&self, snr_db: f64) -> Self {
        let mut mode = self.clone();
        mode.design = mode.design.with_power(db_to_linear(snr_db));
        mode
    }
}
