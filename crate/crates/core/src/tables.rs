//! SNR-for-rate tables: shaping gains and the bit-metric decoding gap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{AskConstellation, LabelingKind};
use crate::error::Result;
use crate::infotheory::{capacity_power, mutual_information, rbmd};
use crate::numeric::{bisect, db_to_linear, linear_to_db};
use crate::shaping::{optimize_input, ShapedInput};

const XTOL_DB: f64 = 1e-5;

/// Smallest SNR (dB) at which `rate_at(snr_db)` reaches `rate`, starting from capacity.
pub fn snr_for_rate<F: Fn(f64) -> f64>(rate_at: F, rate: f64) -> Result<f64> {
    let lo = linear_to_db(capacity_power(rate));
    bisect(|s| rate_at(s) - rate, lo, lo + 3.0, XTOL_DB, 100)
}

/// MI of the MI-optimal Maxwell-Boltzmann input.
pub fn shaped_mi(c: &AskConstellation, snr_db: f64) -> f64 {
    optimize_input(c, db_to_linear(snr_db)).map_or(0.0, |x| mutual_information(&x))
}

/// `R_BMD` of the MI-optimal input.
pub fn shaped_rbmd(c: &AskConstellation, snr_db: f64) -> f64 {
    optimize_input(c, db_to_linear(snr_db)).map_or(0.0, |x| rbmd(&x).rbmd)
}

pub fn uniform_mi(c: &AskConstellation, snr_db: f64) -> f64 {
    mutual_information(&ShapedInput::uniform(c, 1.0).with_power(db_to_linear(snr_db)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapingGainRow {
    pub constellation: String,
    pub rate: f64,
    pub shaped_snr_db: f64,
    pub uniform_snr_db: f64,
    pub uniform_gap_db: f64,
    pub capacity_snr_db: f64,
    pub capacity_gap_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmdGapRow {
    pub constellation: String,
    pub rate: f64,
    pub smd_snr_db: f64,
    pub bmd_snr_db: f64,
    pub gap_db: f64,
}

fn brgc(m: u32) -> Result<AskConstellation> {
    AskConstellation::new(m, LabelingKind::Brgc)
}

/// SNRs needed by shaped and uniform `2^m`-ASK to reach `m − 1` bits.
pub fn shaping_gain_row(m: u32) -> Result<ShapingGainRow> {
    let c = brgc(m)?;
    let rate = (m - 1) as f64;
    let shaped = snr_for_rate(|s| shaped_mi(&c, s), rate)?;
    let uniform = snr_for_rate(|s| uniform_mi(&c, s), rate)?;
    let capacity = linear_to_db(capacity_power(rate));
    Ok(ShapingGainRow {
        constellation: format!("{}-ASK", 1u32 << m),
        rate,
        shaped_snr_db: shaped,
        uniform_snr_db: uniform,
        uniform_gap_db: shaped - uniform,
        capacity_snr_db: capacity,
        capacity_gap_db: shaped - capacity,
    })
}

/// SNRs needed by symbol-metric and bit-metric decoding of the MI-optimal input.
pub fn bmd_gap_row(m: u32) -> Result<BmdGapRow> {
    let c = brgc(m)?;
    let rate = (m - 1) as f64;
    let smd = snr_for_rate(|s| shaped_mi(&c, s), rate)?;
    let bmd = snr_for_rate(|s| shaped_rbmd(&c, s), rate)?;
    Ok(BmdGapRow {
        constellation: format!("{}-ASK", 1u32 << m),
        rate,
        smd_snr_db: smd,
        bmd_snr_db: bmd,
        gap_db: bmd - smd,
    })
}

pub fn shaping_gains(ms: &[u32]) -> Result<Vec<ShapingGainRow>> {
    ms.par_iter().map(|&m| shaping_gain_row(m)).collect()
}

pub fn bmd_gaps(ms: &[u32]) -> Result<Vec<BmdGapRow>> {
    ms.par_iter().map(|&m| bmd_gap_row(m)).collect()
}
