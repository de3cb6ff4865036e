//! Maxwell-Boltzmann inputs, power-constrained exponent solving, scaling
//! optimization and the exponential tilting family used for rate adaptation.

use serde::{Deserialize, Serialize};

use crate::constellation::AskConstellation;
use crate::error::{Error, Result};
use crate::infotheory::{self, Quadrature};
use crate::numeric::{bisect, entropy, golden_section_max};

/// A distribution over the amplitudes `{1, 3, …, 2^m − 1}`, ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDistribution {
    pub amplitudes: Vec<u32>,
    pub probs: Vec<f64>,
}

impl AmplitudeDistribution {
    pub fn new(amplitudes: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != probs.len() || amplitudes.is_empty() {
            return Err(Error::Config(
                "amplitude and probability lists differ in length".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Unnormalized(sum));
        }
        Ok(AmplitudeDistribution { amplitudes, probs })
    }

    pub fn uniform(m: u32) -> Self {
        let count = 1usize << (m - 1);
        AmplitudeDistribution {
            amplitudes: (0..count as u32).map(|i| 2 * i + 1).collect(),
            probs: vec![1.0 / count as f64; count],
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    pub fn second_moment(&self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.probs)
            .map(|(&a, &p)| p * (a as f64).powi(2))
            .sum()
    }

    pub fn prob_of(&self, amplitude: u32) -> Option<f64> {
        self.amplitudes
            .iter()
            .position(|&a| a == amplitude)
            .map(|i| self.probs[i])
    }

    /// Maxwell-Boltzmann exponent implied by the two smallest amplitudes.
    pub fn mb_exponent(&self) -> f64 {
        let (p1, p3) = (self.probs[0], self.probs[1]);
        let (a1, a3) = (self.amplitudes[0] as f64, self.amplitudes[1] as f64);
        if p3 == 0.0 {
            return f64::INFINITY;
        }
        (p1 / p3).ln() / (a3 * a3 - a1 * a1)
    }
}

/// A symmetric input distribution on a scaled ASK constellation.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapedInput {
    constellation: AskConstellation,
    nu: f64,
    delta: f64,
    probs: Vec<f64>,
    amp: AmplitudeDistribution,
}

impl ShapedInput {
    /// `P(x) ∝ exp(−ν x²)`; `ν = ∞` puts all mass on `±1`.
    pub fn maxwell_boltzmann(constellation: &AskConstellation, nu: f64, delta: f64) -> Self {
        let weights: Vec<f64> = constellation
            .points()
            .iter()
            .map(|&x| {
                let excess = (x * x - 1) as f64;
                if nu.is_infinite() {
                    if excess == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (-nu * excess).exp()
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Self::from_point_probs(constellation, probs, nu, delta)
    }

    pub fn uniform(constellation: &AskConstellation, delta: f64) -> Self {
        Self::maxwell_boltzmann(constellation, 0.0, delta)
    }

    /// Symmetric input with `P(x) = P_A(|x|) / 2`.
    pub fn from_amplitudes(
        constellation: &AskConstellation,
        dist: &AmplitudeDistribution,
        delta: f64,
    ) -> Result<Self> {
        if dist.amplitudes.len() != constellation.num_amplitudes() {
            return Err(Error::Config(format!(
                "amplitude distribution has {} entries, constellation {}",
                dist.amplitudes.len(),
                constellation.num_amplitudes()
            )));
        }
        let mut probs = Vec::with_capacity(constellation.num_points());
        for &x in constellation.points() {
            let pa = dist
                .prob_of(x.unsigned_abs())
                .ok_or(Error::AlphabetViolation(x.unsigned_abs()))?;
            probs.push(pa / 2.0);
        }
        Ok(Self::from_point_probs(
            constellation,
            probs,
            dist.mb_exponent(),
            delta,
        ))
    }

    fn from_point_probs(c: &AskConstellation, probs: Vec<f64>, nu: f64, delta: f64) -> Self {
        let half = c.num_amplitudes();
        let amp = AmplitudeDistribution {
            amplitudes: (0..half as u32).map(|i| 2 * i + 1).collect(),
            probs: probs[half..].iter().zip(probs[..half].iter().rev()).map(|(p, q)| p + q).collect(),
        };
        ShapedInput {
            constellation: c.clone(),
            nu,
            delta,
            probs,
            amp,
        }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        ShapedInput {
            delta,
            ..self.clone()
        }
    }

    /// Same distribution, scaled so that `Δ² E[X²] = power`.
    pub fn with_power(&self, power: f64) -> Self {
        self.with_delta((power / self.second_moment()).sqrt())
    }

    pub fn constellation(&self) -> &AskConstellation {
        &self.constellation
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Point probabilities in ascending point order.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn amplitude_distribution(&self) -> &AmplitudeDistribution {
        &self.amp
    }

    /// Unscaled second moment `E[X²]`.
    pub fn second_moment(&self) -> f64 {
        self.constellation
            .points()
            .iter()
            .zip(&self.probs)
            .map(|(&x, &p)| p * (x * x) as f64)
            .sum()
    }

    /// Transmit power `Δ² E[X²]`.
    pub fn power(&self) -> f64 {
        self.delta * self.delta * self.second_moment()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }

    pub fn amplitude_entropy(&self) -> f64 {
        self.amp.entropy()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.probs.len();
        (0..n / 2).all(|i| (self.probs[i] - self.probs[n - 1 - i]).abs() <= 1e-15)
    }
}

fn mb_second_moment(c: &AskConstellation, nu: f64) -> f64 {
    ShapedInput::maxwell_boltzmann(c, nu, 1.0).second_moment()
}

/// Exponent `ν ≥ 0` with `E[X_ν²] = target` (unscaled points).
pub fn solve_nu(c: &AskConstellation, target: f64) -> Result<f64> {
    let max = c.uniform_second_moment();
    if !(1.0..=max * (1.0 + 1e-12)).contains(&target) {
        return Err(Error::InfeasibleTarget { target, max });
    }
    if target >= max {
        return Ok(0.0);
    }
    if target <= 1.0 {
        return Ok(f64::INFINITY);
    }
    let mut hi = 1.0;
    while mb_second_moment(c, hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(f64::INFINITY);
        }
    }
    bisect(
        |nu| mb_second_moment(c, nu) - target,
        0.0,
        hi,
        1e-15 * hi,
        400,
    )
}

/// Maximizes `I(X_Δ; ΔX_Δ + Z)` over the scaling `Δ` at power `P` (unit noise).
///
/// For each candidate `Δ` the Maxwell-Boltzmann exponent meets the power
/// constraint with equality.
pub fn optimize_input(c: &AskConstellation, power: f64) -> Result<ShapedInput> {
    optimize_input_with(c, power, infotheory::default_quadrature())
}

pub fn optimize_input_with(
    c: &AskConstellation,
    power: f64,
    quad: &Quadrature,
) -> Result<ShapedInput> {
    if !(power > 0.0) {
        return Err(Error::NonPositivePower(power));
    }
    let input_at = |delta: f64| -> ShapedInput {
        let target = (power / (delta * delta)).clamp(1.0, c.uniform_second_moment());
        let nu = solve_nu(c, target).expect("target clamped into range");
        ShapedInput::maxwell_boltzmann(c, nu, delta)
    };
    let (lo, hi) = delta_bracket(c, power);
    let (delta, _) = golden_section_max(
        |d| infotheory::mutual_information_with(&input_at(d), quad),
        lo,
        hi,
        1e-6,
    );
    Ok(input_at(delta))
}

/// Scaling bracket `[sqrt(P / E_uniform), sqrt(P)]`.
pub fn delta_bracket(c: &AskConstellation, power: f64) -> (f64, f64) {
    ((power / c.uniform_second_moment()).sqrt(), power.sqrt())
}

/// Tilts `P_A(a)` by `exp(λ a²)` and renormalizes.
pub fn lambda_shift(reference: &AmplitudeDistribution, lambda: f64) -> AmplitudeDistribution {
    let amplitudes = reference.amplitudes.clone();
    if lambda == f64::NEG_INFINITY {
        let mut probs = vec![0.0; amplitudes.len()];
        let smallest = (0..amplitudes.len())
            .min_by_key(|&i| amplitudes[i])
            .expect("non-empty");
        probs[smallest] = 1.0;
        return AmplitudeDistribution { amplitudes, probs };
    }
    let logs: Vec<f64> = amplitudes
        .iter()
        .zip(&reference.probs)
        .map(|(&a, &p)| p.ln() + lambda * (a as f64).powi(2))
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    AmplitudeDistribution {
        amplitudes,
        probs: weights.iter().map(|w| w / total).collect(),
    }
}

/// Tilt `λ` with `H(A^λ) + γ = target_rate`.
pub fn solve_rate(reference: &AmplitudeDistribution, gamma: f64, target_rate: f64) -> Result<f64> {
    let max_entropy = (reference.amplitudes.len() as f64).log2();
    let (min, max) = (gamma, max_entropy + gamma);
    let tol = 1e-12;
    if !(min - tol..=max + tol).contains(&target_rate) {
        return Err(Error::InfeasibleRate {
            rate: target_rate,
            min,
            max,
        });
    }
    let uniform_point = reference.mb_exponent();
    let target = target_rate - gamma;
    if target >= max_entropy - tol {
        return Ok(uniform_point);
    }
    if target <= tol {
        return Ok(f64::NEG_INFINITY);
    }
    let h = |lambda: f64| lambda_shift(reference, lambda).entropy() - target;
    let hi = uniform_point;
    let mut step = 1e-3_f64.max(uniform_point.abs());
    let mut lo = hi - step;
    while h(lo) > 0.0 {
        step *= 2.0;
        lo = hi - step;
        if step > 1e9 {
            return Err(Error::RootSearch("entropy target not bracketed".into()));
        }
    }
    bisect(h, lo, hi, 1e-15 * step, 400)
}
