//! Capacity, mutual information, bit-metric decoding rates and matcher
//! divergence for discrete inputs on the unit-variance AWGN channel.
//!
//! Expectations over the noise use Gauss-Hermite quadrature centred on each
//! transmitted point, so `E[f(Y) | X = x] = Σ_k w_k f(Δx + z_k)`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::ccdm::Composition;
use crate::constellation::label_bit;
use crate::error::{Error, Result};
use crate::numeric::{linear_to_db, neg_p_log2_p};
use crate::shaping::{AmplitudeDistribution, ShapedInput};

pub const DEFAULT_NODES: usize = 128;

/// Gauss-Hermite rule rescaled to the standard normal density: nodes `z_k`
/// and weights `w_k` with `Σ w_k = 1` and `E[f(Z)] ≈ Σ w_k f(z_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub count: usize,
}

impl Quadrature {
    pub fn gauss_hermite(count: usize) -> Self {
        assert!(count >= 1);
        let (x, w) = hermite_rule(count);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        Quadrature {
            nodes: x.iter().map(|v| v * std::f64::consts::SQRT_2).collect(),
            weights: w.iter().map(|v| v / sqrt_pi).collect(),
            count,
        }
    }

    /// `E[f(Z)]` for `Z ~ N(0, 1)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Nodes and weights for `∫ e^{−x²} f(x) dx`: roots of the orthonormal Hermite
/// recurrence, bracketed on a grid and refined by bisection.
fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let eval = |z: f64| {
        let mut p1 = std::f64::consts::PI.powf(-0.25);
        let mut p2 = 0.0;
        for j in 1..=n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
        }
        (p1, (2.0 * nf).sqrt() * p2)
    };
    let mut roots = Vec::with_capacity(n.div_ceil(2));
    if n % 2 == 1 {
        roots.push(0.0);
    }
    let step = 0.25 / (2.0 * nf + 1.0).sqrt();
    let upper = (2.0 * nf + 1.0).sqrt() + 1.0;
    let mut lo = 0.5 * step;
    let mut f_lo = eval(lo).0;
    while lo < upper && roots.len() < n.div_ceil(2) {
        let hi = lo + step;
        let f_hi = eval(hi).0;
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, fa) = (lo, hi, f_lo);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if eval(mid).0.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    assert_eq!(roots.len(), n.div_ceil(2), "hermite root bracketing");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for (i, &z) in roots.iter().rev().enumerate() {
        let pp = eval(z).1;
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

pub fn default_quadrature() -> &'static Quadrature {
    static QUAD: OnceLock<Quadrature> = OnceLock::new();
    QUAD.get_or_init(|| Quadrature::gauss_hermite(DEFAULT_NODES))
}

/// AWGN capacity `½ log2(1 + P)` in bits per real dimension.
pub fn capacity(power: f64) -> f64 {
    0.5 * (1.0 + power).log2()
}

/// Power at which the capacity equals `rate`.
pub fn capacity_power(rate: f64) -> f64 {
    (2.0 * rate).exp2() - 1.0
}

/// Rates achievable with one shaped input at one scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub snr_db: f64,
    /// `I(X; Y)`, the symbol-metric decoding rate.
    pub mi: f64,
    /// `H(B) − Σ H(B_i | Y)`.
    pub rbmd: f64,
    pub per_level_cond_entropy: Vec<f64>,
    /// Transmission rate `H(A) + γ`.
    pub tx_rate: f64,
    pub input_entropy: f64,
}

impl RateReport {
    pub fn backoff(&self) -> f64 {
        self.rbmd - self.tx_rate
    }
}

pub fn mutual_information(input: &ShapedInput) -> f64 {
    mutual_information_with(input, default_quadrature())
}

/// `I(X; ΔX + Z)` in bits.
pub fn mutual_information_with(input: &ShapedInput, quad: &Quadrature) -> f64 {
    let delta = input.delta();
    let points = input.constellation().points();
    let probs = input.probs();
    let mut acc = 0.0;
    for (i, &x) in points.iter().enumerate() {
        let px = probs[i];
        if px == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (&z, &w) in quad.nodes.iter().zip(&quad.weights) {
            let mut s = 0.0;
            for (j, &xp) in points.iter().enumerate() {
                let p = probs[j];
                if p == 0.0 {
                    continue;
                }
                let d = delta * (x - xp) as f64;
                s += p * (-0.5 * d * (d + 2.0 * z)).exp();
            }
            inner += w * s.log2();
        }
        acc -= px * inner;
    }
    acc.max(0.0)
}

pub fn rbmd(input: &ShapedInput) -> RateReport {
    rate_report(input, 0.0)
}

pub fn rate_report(input: &ShapedInput, gamma: f64) -> RateReport {
    rate_report_with(input, gamma, default_quadrature())
}

/// MI, `R_BMD` and per-level conditional entropies in one pass.
pub fn rate_report_with(input: &ShapedInput, gamma: f64, quad: &Quadrature) -> RateReport {
    let c = input.constellation();
    let m = c.m() as usize;
    let delta = input.delta();
    let points = c.points();
    let probs = input.probs();
    let labels = c.point_labels();
    let n = points.len();

    let mut cond_x = 0.0;
    let mut cond_levels = vec![0.0; m];
    let mut lik = vec![0.0; n];
    for i in 0..n {
        let px = probs[i];
        if px == 0.0 {
            continue;
        }
        for (&z, &w) in quad.nodes.iter().zip(&quad.weights) {
            let mut total = 0.0;
            for j in 0..n {
                let d = delta * (points[i] - points[j]) as f64;
                lik[j] = probs[j] * (-0.5 * d * (d + 2.0 * z)).exp();
                total += lik[j];
            }
            cond_x -= px * w * (lik[i] / total).log2();
            for (level, h) in cond_levels.iter_mut().enumerate() {
                let bit = label_bit(labels[i], level + 1, m as u32);
                let same: f64 = (0..n)
                    .filter(|&j| label_bit(labels[j], level + 1, m as u32) == bit)
                    .map(|j| lik[j])
                    .sum();
                *h -= px * w * (same / total).log2();
            }
        }
    }
    let hx = input.entropy();
    let cond_levels: Vec<f64> = cond_levels.into_iter().map(|h| h.max(0.0)).collect();
    let mi = (hx - cond_x.max(0.0)).max(0.0);
    let rbmd = (hx - cond_levels.iter().sum::<f64>()).max(0.0);
    RateReport {
        snr_db: linear_to_db(input.power()),
        mi,
        rbmd,
        per_level_cond_entropy: cond_levels,
        tx_rate: input.amplitude_entropy() + gamma,
        input_entropy: hx,
    }
}

/// Per-level entropies `H(B_i)` of the labeled input.
pub fn level_entropies(input: &ShapedInput) -> Vec<f64> {
    let c = input.constellation();
    let m = c.m();
    (1..=m as usize)
        .map(|level| {
            let mut p1 = 0.0;
            for (idx, &p) in input.probs().iter().enumerate() {
                if label_bit(c.point_label(idx), level, m) == 1 {
                    p1 += p;
                }
            }
            neg_p_log2_p(p1) + neg_p_log2_p(1.0 - p1)
        })
        .collect()
}

/// Normalized informational divergence of a matcher that outputs `2^k`
/// equiprobable sequences of one composition, against the i.i.d. law `P_A^n`.
pub fn ccdm_divergence(
    composition: &Composition,
    dist: &AmplitudeDistribution,
    k: u64,
) -> Result<f64> {
    let max = composition.max_k();
    if k > max {
        return Err(Error::InvalidK { k, max });
    }
    let mut cross = 0.0;
    for (&a, &count) in composition.symbols().iter().zip(composition.counts()) {
        if count == 0 {
            continue;
        }
        let p = dist.prob_of(a).ok_or(Error::AlphabetViolation(a))?;
        if p <= 0.0 {
            return Err(Error::Config(format!(
                "amplitude {a} used by the composition has zero probability"
            )));
        }
        cross -= count as f64 * p.log2();
    }
    let n = composition.len() as f64;
    Ok(((cross - k as f64) / n).max(0.0))
}
