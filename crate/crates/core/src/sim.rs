//! Monte Carlo link simulation, operating-point search and rate adaptation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::AskConstellation;
use crate::error::{Error, Result};
use crate::infotheory::{capacity_power, rate_report};
use crate::numeric::{bisect, db_to_linear, linear_to_db};
use crate::pipeline::{Link, PasDesign};
use crate::shaping::{lambda_shift, optimize_input, solve_rate, AmplitudeDistribution, ShapedInput};

/// Reproducible per-frame random source: stream `frame` of a seeded ChaCha generator.
#[derive(Clone, Debug)]
pub struct ChannelRng {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl ChannelRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        ChannelRng { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.rng.random::<bool>() as u8).collect()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// `y = x + z` with i.i.d. `z ~ N(0, variance)`.
pub fn awgn(symbols: &[f64], rng: &mut ChannelRng, variance: f64) -> Vec<f64> {
    if variance == 0.0 {
        return symbols.to_vec();
    }
    let sigma = variance.sqrt();
    symbols.iter().map(|&x| x + sigma * rng.normal()).collect()
}

/// Monte Carlo stopping rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_frames: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: 50,
            max_frames: 100_000,
        }
    }
}

/// A measured point on the rate/SNR plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub mode: String,
    pub rate: f64,
    pub snr_db: f64,
    pub gap_db: f64,
    pub fer: f64,
    pub ci95: f64,
    pub frames: u64,
    pub errors: u64,
    /// `R_BMD − R` under the design input at this SNR.
    pub backoff: f64,
    /// One-sided 95% upper bound `3/N` when no error was observed.
    pub fer_upper_bound: Option<f64>,
}

impl OperatingPoint {
    pub fn new(mode: &str, rate: f64, snr_db: f64, errors: u64, frames: u64, backoff: f64) -> Self {
        let fer = if frames == 0 {
            0.0
        } else {
            errors as f64 / frames as f64
        };
        OperatingPoint {
            mode: mode.to_string(),
            rate,
            snr_db,
            gap_db: gap_db(rate, snr_db),
            fer,
            ci95: ci95(fer, frames),
            frames,
            errors,
            backoff,
            fer_upper_bound: (errors == 0 && frames > 0).then(|| 3.0 / frames as f64),
        }
    }
}

/// Distance in dB from the capacity-achieving SNR at `rate`.
pub fn gap_db(rate: f64, snr_db: f64) -> f64 {
    snr_db - linear_to_db(capacity_power(rate))
}

/// Normal-approximation 95% half-width.
pub fn ci95(fer: f64, frames: u64) -> f64 {
    if frames == 0 {
        return 0.0;
    }
    1.96 * (fer * (1.0 - fer) / frames as f64).sqrt()
}

const BATCH: u64 = 64;

/// Outcome of one simulated frame: `true` on a frame error.
pub fn simulate_frame<L: Link>(link: &L, seed: u64, frame: u64, noise_variance: f64) -> bool {
    let mut rng = ChannelRng::new(seed, frame);
    let data = rng.bits(link.data_bits());
    let Ok(x) = link.transmit(&data) else {
        return true;
    };
    let y = awgn(&x, &mut rng, noise_variance);
    link.receive(&y).map_or(true, |d| d != data)
}

/// Frame error rate of `link` at `snr_db`.
///
/// Frames are simulated in parallel batches and counted in index order, so
/// the result does not depend on the number of worker threads.
pub fn run_fer<L: Link>(link: &L, snr_db: f64, stop: StopRule, seed: u64) -> OperatingPoint {
    run_fer_with_noise(link, snr_db, stop, seed, 1.0)
}

pub fn run_fer_with_noise<L: Link>(
    link: &L,
    snr_db: f64,
    stop: StopRule,
    seed: u64,
    noise_variance: f64,
) -> OperatingPoint {
    let link = link.at_snr_db(snr_db);
    let (mut frames, mut errors) = (0u64, 0u64);
    'outer: while frames < stop.max_frames {
        let end = (frames + BATCH).min(stop.max_frames);
        let outcomes: Vec<bool> = (frames..end)
            .into_par_iter()
            .map(|f| simulate_frame(&link, seed, f, noise_variance))
            .collect();
        for failed in outcomes {
            frames += 1;
            errors += failed as u64;
            if errors >= stop.min_errors {
                break 'outer;
            }
        }
    }
    OperatingPoint::new(
        link.id(),
        link.rate(),
        snr_db,
        errors,
        frames,
        backoff(link.design(), link.gamma(), link.rate()),
    )
}

/// `R_BMD − rate` for the given (scaled) input.
pub fn backoff(input: &ShapedInput, gamma: f64, rate: f64) -> f64 {
    rate_report(input, gamma).rbmd - rate
}

/// `R_BMD − (H(A) + γ)`, the back-off of the design rate itself.
pub fn design_backoff(input: &ShapedInput, gamma: f64) -> f64 {
    rate_report(input, gamma).backoff()
}

/// A reference operating point for rate adaptation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub m: u32,
    pub gamma: f64,
    pub rate: f64,
    pub snr_db: f64,
    pub amplitudes: AmplitudeDistribution,
    pub delta: f64,
}

impl Reference {
    /// Reference whose amplitudes are the MI-maximizing input at `snr_db`.
    pub fn optimal(c: &AskConstellation, gamma: f64, rate: f64, snr_db: f64) -> Result<Self> {
        let input = optimize_input(c, db_to_linear(snr_db))?;
        Ok(Reference {
            m: c.m(),
            gamma,
            rate,
            snr_db,
            amplitudes: input.amplitude_distribution().clone(),
            delta: input.delta(),
        })
    }

    pub fn input(&self, c: &AskConstellation) -> Result<ShapedInput> {
        ShapedInput::from_amplitudes(c, &self.amplitudes, self.delta)
    }

    /// `R_BMD° − R°`.
    pub fn backoff(&self, c: &AskConstellation) -> Result<f64> {
        Ok(backoff(&self.input(c)?, self.gamma, self.rate))
    }
}

/// Result of adapting a reference to a new rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adapted {
    pub rate: f64,
    pub lambda: f64,
    pub amplitudes: AmplitudeDistribution,
    pub delta: f64,
    pub snr_db: f64,
    pub gap_db: f64,
    pub backoff: f64,
}

/// New amplitude distribution and scaling that keep the reference back-off at `target_rate`.
pub fn adapt(c: &AskConstellation, reference: &Reference, target_rate: f64) -> Result<Adapted> {
    let target_backoff = reference.backoff(c)?;
    let lambda = solve_rate(&reference.amplitudes, reference.gamma, target_rate)?;
    let amplitudes = lambda_shift(&reference.amplitudes, lambda);
    let base = ShapedInput::from_amplitudes(c, &amplitudes, 1.0)?;
    let residual = |snr_db: f64| {
        let input = base.with_power(db_to_linear(snr_db));
        backoff(&input, reference.gamma, target_rate) - target_backoff
    };
    let snr_db = bisect(residual, -20.0, 80.0, 1e-7, 200)?;
    let input = base.with_power(db_to_linear(snr_db));
    Ok(Adapted {
        rate: target_rate,
        lambda,
        amplitudes,
        delta: input.delta(),
        snr_db,
        gap_db: gap_db(target_rate, snr_db),
        backoff: backoff(&input, reference.gamma, target_rate),
    })
}

/// Search policy for [`find_operating_point`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchPolicy {
    pub step_db: f64,
    pub max_steps: usize,
    pub refinements: usize,
    pub stop: StopRule,
}

impl Default for SearchPolicy {
    fn default() -> Self {
        SearchPolicy {
            step_db: 0.5,
            max_steps: 40,
            refinements: 2,
            stop: StopRule::default(),
        }
    }
}

/// SNR at which the design rate `H(A) + γ` of the MI-optimal input meets `R_BMD`.
pub fn crossing_snr_db(c: &AskConstellation, gamma: f64) -> Result<f64> {
    let f = |snr_db: f64| -> f64 {
        match optimize_input(c, db_to_linear(snr_db)) {
            Ok(input) => design_backoff(&input, gamma),
            Err(_) => f64::NAN,
        }
    };
    bisect(f, -10.0, 6.03 * c.m() as f64 + 10.0, 1e-3, 100)
}

fn qualifies(point: &OperatingPoint, target_fer: f64) -> bool {
    point.fer <= target_fer && point.frames as f64 * target_fer >= 3.0
}

/// Scans the SNR upward along the rate curve from `start_db` until the FER
/// drops to `target_fer`, then refines between the last two scan points.
pub fn find_operating_point<L, F>(
    build: F,
    start_db: f64,
    target_fer: f64,
    policy: SearchPolicy,
    seed: u64,
) -> Result<OperatingPoint>
where
    L: Link,
    F: Fn(f64) -> Result<L>,
{
    let measure = |snr_db: f64| -> Result<OperatingPoint> {
        let link = build(snr_db)?;
        Ok(run_fer(&link, snr_db, policy.stop, seed))
    };
    let mut trace = Vec::new();
    let mut failing: Option<f64> = None;
    let mut found = None;
    for step in 0..policy.max_steps {
        let snr_db = start_db + step as f64 * policy.step_db;
        let point = measure(snr_db)?;
        trace.push(point.clone());
        if qualifies(&point, target_fer) {
            found = Some(point);
            break;
        }
        failing = Some(snr_db);
    }
    let Some(mut best) = found else {
        return Err(Error::SearchFailure { trace });
    };
    if let Some(mut lo) = failing {
        let mut hi = best.snr_db;
        for _ in 0..policy.refinements {
            let mid = 0.5 * (lo + hi);
            let point = measure(mid)?;
            if qualifies(&point, target_fer) {
                hi = mid;
                best = point;
            } else {
                lo = mid;
            }
        }
    }
    Ok(best)
}

/// [`find_operating_point`] for PAS, re-optimizing the input at every SNR.
pub fn find_pas_operating_point(
    design: &PasDesign,
    target_fer: f64,
    policy: SearchPolicy,
    seed: u64,
) -> Result<OperatingPoint> {
    let gamma = design.gamma()?;
    let gamma = *gamma.numer() as f64 / *gamma.denom() as f64;
    let start = crossing_snr_db(&design.constellation, gamma)?;
    find_operating_point(|snr| design.optimal_mode(snr), start, target_fer, policy, seed)
}

/// SNR where the FER curve through `points` crosses `target` (log-linear interpolation).
pub fn snr_at_fer(points: &[OperatingPoint], target: f64) -> Option<f64> {
    let mut sorted: Vec<&OperatingPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    sorted.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        if a.fer >= target && b.fer <= target && a.fer > 0.0 {
            let fb = b.fer.max(b.fer_upper_bound.unwrap_or(0.0) * 0.1).max(1e-12);
            let (la, lb) = (a.fer.ln(), fb.ln());
            if (la - lb).abs() < 1e-15 {
                return Some(a.snr_db);
            }
            let t = (la - target.ln()) / (la - lb);
            Some(a.snr_db + t * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}
