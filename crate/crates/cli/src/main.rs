use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use pas_core::ccdm::{choose_composition, Composition, MatcherSpec};
use pas_core::config::{Mode, ModeConfig};
use pas_core::constellation::{AskConstellation, LabelingKind};
use pas_core::infotheory::rate_report;
use pas_core::ldpc::{peg, shipped, BpDecoder, LdpcCode, TannerGraph};
use pas_core::numeric::db_to_linear;
use pas_core::pipeline::{Link, DEFAULT_MAX_ITER};
use pas_core::shaping::{optimize_input, AmplitudeDistribution};
use pas_core::sim::{adapt, awgn, run_fer, ChannelRng, OperatingPoint, Reference, StopRule};
use pas_core::tables;

#[derive(Parser)]
#[command(name = "pas", version, about = "Probabilistic amplitude shaping toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    ShapingGains,
    BmdGap,
}

#[derive(Subcommand)]
enum Command {
    /// MI-maximizing Maxwell-Boltzmann input for 2^m-ASK at a given SNR.
    OptimizeInput {
        #[arg(long)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: f64,
        #[arg(long, default_value = "brgc")]
        labeling: LabelingKind,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Shaping-gain or bit-metric-decoding-gap table as CSV.
    Tables {
        #[arg(long, value_enum)]
        table: TableKind,
        /// Bits per symbol to include.
        #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 4, 5, 6])]
        m: Vec<u32>,
    },
    /// Length-n composition for the optimal input (or given probabilities), as JSON.
    Compose {
        #[arg(long)]
        n: usize,
        #[arg(long, requires = "snr_db", conflicts_with = "probs")]
        m: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
        /// Amplitude probabilities for 1, 3, 5, ...
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
        /// Input length, at most the largest admissible value.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Maps bits to a constant-composition amplitude sequence.
    Match {
        #[command(flatten)]
        io: MatchIo,
    },
    /// Inverse of `match`.
    Dematch {
        #[command(flatten)]
        io: MatchIo,
    },
    /// Sum-product decoding of whitespace-separated LLRs (log P0/P1).
    Decode {
        /// alist file, or builtin:NAME for a shipped code.
        #[arg(long)]
        alist: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// LLR file; stdin when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Monte Carlo frame error rate of a configured mode.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Defaults to the SNR in the mode file.
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
    },
    /// Adapts a reference operating point to new rates without simulation.
    PlanRate {
        /// JSON with m, gamma, rate, snr_db and optionally amplitudes and delta.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rate: Vec<f64>,
        #[arg(long, default_value = "brgc")]
        labeling: LabelingKind,
    },
    /// FER over a grid of SNRs (and optionally rates) as CSV.
    Sweep {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        snr_db: Vec<f64>,
        /// Transmission rates for PAS modes; defaults to the mode file.
        #[arg(long, value_delimiter = ',')]
        rate: Vec<f64>,
    },
    /// Column-weight-regular PEG code with full rank, as alist.
    GenCode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        checks: usize,
        #[arg(long, default_value_t = 3)]
        dv: usize,
        #[arg(long, default_value_t = peg::TOY_SEED)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// JSON dump of one simulated PAS frame.
    Frame {
        #[arg(long)]
        mode: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        frame: u64,
    },
}

#[derive(clap::Args)]
struct MatchIo {
    /// Composition JSON as written by `compose`.
    #[arg(long)]
    composition: PathBuf,
    #[arg(long)]
    k: Option<u64>,
    /// Input file; stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Raw binary I/O: bits packed MSB first, one byte per amplitude.
    #[arg(long)]
    raw: bool,
}

#[derive(clap::Args)]
struct SimArgs {
    /// Mode file (TOML).
    #[arg(long)]
    mode: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "50", value_parser = parse_count)]
    min_errors: u64,
    #[arg(long, default_value = "1e5", value_parser = parse_count)]
    max_frames: u64,
}

impl SimArgs {
    fn stop(&self) -> StopRule {
        StopRule {
            min_errors: self.min_errors,
            max_frames: self.max_frames,
        }
    }
}

/// Accepts `100000` as well as `1e5`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("not a non-negative integer: {s}"));
    }
    Ok(v as u64)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::OptimizeInput {
            m,
            snr_db,
            labeling,
            format,
        } => optimize(&mut out, m, snr_db, labeling, format),
        Command::Tables { table, m } => write_table(&mut out, table, &m),
        Command::Compose {
            n,
            m,
            snr_db,
            probs,
            k,
        } => compose(&mut out, n, m.zip(snr_db), probs, k),
        Command::Match { io } => run_match(&mut out, &io),
        Command::Dematch { io } => run_dematch(&mut out, &io),
        Command::Decode {
            alist,
            max_iter,
            input,
        } => decode(&mut out, &alist, max_iter, input.as_deref()),
        Command::Simulate { sim, snr_db } => {
            let (cfg, base) = ModeConfig::load(&sim.mode)?;
            let mode = cfg.build(&base)?;
            let point = run_fer(&mode, snr_db.unwrap_or(cfg.snr_db), sim.stop(), sim.seed);
            writeln!(out, "{}", serde_json::to_string_pretty(&point)?)?;
            Ok(())
        }
        Command::PlanRate {
            reference,
            rate,
            labeling,
        } => plan_rate(&mut out, &reference, &rate, labeling),
        Command::Sweep { sim, snr_db, rate } => sweep(&mut out, &sim, &snr_db, &rate),
        Command::GenCode {
            n,
            checks,
            dv,
            seed,
            output,
        } => {
            let (code, used) = peg::full_rank_code(n, checks, dv, seed)?;
            if used != seed {
                eprintln!("seed {seed} gave a rank-deficient matrix; used seed {used}");
            }
            match output {
                Some(path) => fs::write(&path, code.to_alist())
                    .with_context(|| format!("writing {}", path.display()))?,
                None => write!(out, "{}", code.to_alist())?,
            }
            Ok(())
        }
        Command::Frame {
            mode,
            snr_db,
            seed,
            frame,
        } => dump_frame(&mut out, &mode, snr_db, seed, frame),
    }
}

#[derive(Serialize)]
struct InputReport {
    m: u32,
    snr_db: f64,
    nu: f64,
    delta: f64,
    points: Vec<i32>,
    probs: Vec<f64>,
    mi: f64,
    rbmd: f64,
    amplitude_entropy: f64,
}

fn optimize(out: &mut impl Write, m: u32, snr_db: f64, labeling: LabelingKind, format: Format) -> Result<()> {
    let c = AskConstellation::new(m, labeling)?;
    let input = optimize_input(&c, db_to_linear(snr_db))?;
    let rates = rate_report(&input, 0.0);
    let report = InputReport {
        m,
        snr_db,
        nu: input.nu(),
        delta: input.delta(),
        points: c.points().to_vec(),
        probs: input.probs().to_vec(),
        mi: rates.mi,
        rbmd: rates.rbmd,
        amplitude_entropy: input.amplitude_entropy(),
    };
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["x", "P(x)", "nu", "delta", "mi", "rbmd", "H(A)"])?;
            for (x, p) in report.points.iter().zip(&report.probs) {
                w.write_record([
                    x.to_string(),
                    p.to_string(),
                    report.nu.to_string(),
                    report.delta.to_string(),
                    report.mi.to_string(),
                    report.rbmd.to_string(),
                    report.amplitude_entropy.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn write_table(out: &mut impl Write, table: TableKind, ms: &[u32]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match table {
        TableKind::ShapingGains => {
            w.write_record([
                "Constellation",
                "Rate",
                "X* SNR [dB]",
                "Uniform SNR [dB]",
                "Uniform Gap [dB]",
                "Capacity SNR [dB]",
                "Capacity Gap [dB]",
            ])?;
            for r in tables::shaping_gains(ms)? {
                w.write_record([
                    r.constellation,
                    fmt4(r.rate),
                    fmt4(r.shaped_snr_db),
                    fmt4(r.uniform_snr_db),
                    fmt4(r.uniform_gap_db),
                    fmt4(r.capacity_snr_db),
                    fmt4(r.capacity_gap_db),
                ])?;
            }
        }
        TableKind::BmdGap => {
            w.write_record(["Constellation", "Rate", "SMD SNR [dB]", "BMD SNR [dB]", "Gap [dB]"])?;
            for r in tables::bmd_gaps(ms)? {
                w.write_record([
                    r.constellation,
                    fmt4(r.rate),
                    fmt4(r.smd_snr_db),
                    fmt4(r.bmd_snr_db),
                    fmt4(r.gap_db),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

#[derive(Serialize, Deserialize)]
struct ComposeReport {
    composition: Composition,
    n: usize,
    k: u64,
    rate: f64,
    entropy: f64,
}

fn compose(
    out: &mut impl Write,
    n: usize,
    optimal: Option<(u32, f64)>,
    probs: Option<Vec<f64>>,
    k: Option<u64>,
) -> Result<()> {
    if n == 0 {
        bail!("--n must be positive");
    }
    let dist = match (optimal, probs) {
        (Some((m, snr_db)), None) => {
            let c = AskConstellation::new(m, LabelingKind::Brgc)?;
            optimize_input(&c, db_to_linear(snr_db))?.amplitude_distribution().clone()
        }
        (None, Some(p)) => {
            let amplitudes = (0..p.len() as u32).map(|i| 2 * i + 1).collect();
            AmplitudeDistribution::new(amplitudes, p)?
        }
        _ => bail!("give either --m with --snr-db, or --probs"),
    };
    let composition = choose_composition(&dist, n);
    let spec = matcher(composition, k)?;
    let report = ComposeReport {
        n,
        k: spec.k(),
        rate: spec.rate(),
        entropy: dist.entropy(),
        composition: spec.composition().clone(),
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn matcher(composition: Composition, k: Option<u64>) -> Result<MatcherSpec> {
    Ok(match k {
        Some(k) => MatcherSpec::with_k(composition, k)?,
        None => MatcherSpec::new(composition),
    })
}

/// Reads a composition either bare or wrapped in a `compose` report.
fn load_matcher(io: &MatchIo) -> Result<MatcherSpec> {
    let text = fs::read_to_string(&io.composition)
        .with_context(|| format!("reading {}", io.composition.display()))?;
    let composition = match serde_json::from_str::<ComposeReport>(&text) {
        Ok(report) => {
            let k = io.k.unwrap_or(report.k);
            return matcher(report.composition, Some(k));
        }
        Err(_) => serde_json::from_str::<Composition>(&text)
            .with_context(|| format!("parsing composition {}", io.composition.display()))?,
    };
    matcher(composition, io.k)
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match path {
        Some(p) => buf = fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            io::stdin().read_to_end(&mut buf)?;
        }
    }
    Ok(buf)
}

/// Bits as `0`/`1` characters, separators ignored.
fn parse_bits(text: &str) -> Result<Vec<u8>> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => bail!("invalid bit character {other:?}"),
        })
        .collect()
}

fn unpack_bits(bytes: &[u8], count: usize) -> Result<Vec<u8>> {
    if bytes.len() * 8 < count {
        bail!("expected {count} bits, got {}", bytes.len() * 8);
    }
    Ok((0..count).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect())
}

fn pack_bits(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
        })
        .collect()
}

fn run_match(out: &mut impl Write, io: &MatchIo) -> Result<()> {
    let spec = load_matcher(io)?;
    let input = read_input(io.input.as_deref())?;
    let bits = if io.raw {
        unpack_bits(&input, spec.k() as usize)?
    } else {
        parse_bits(std::str::from_utf8(&input)?)?
    };
    let amplitudes = spec.match_bits(&bits)?;
    if io.raw {
        let bytes = amplitudes
            .iter()
            .map(|&a| u8::try_from(a).context("amplitude does not fit in a byte"))
            .collect::<Result<Vec<_>>>()?;
        out.write_all(&bytes)?;
    } else {
        writeln!(out, "{}", join(&amplitudes))?;
    }
    Ok(())
}

fn run_dematch(out: &mut impl Write, io: &MatchIo) -> Result<()> {
    let spec = load_matcher(io)?;
    let input = read_input(io.input.as_deref())?;
    let amplitudes: Vec<u32> = if io.raw {
        input.iter().map(|&b| b as u32).collect()
    } else {
        std::str::from_utf8(&input)?
            .split_whitespace()
            .map(|t| t.parse().with_context(|| format!("invalid amplitude {t:?}")))
            .collect::<Result<_>>()?
    };
    let bits = spec.dematch(&amplitudes)?;
    if io.raw {
        out.write_all(&pack_bits(&bits))?;
    } else {
        let text: String = bits.iter().map(|b| char::from(b'0' + b)).collect();
        writeln!(out, "{text}")?;
    }
    Ok(())
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn load_code(alist: &str) -> Result<LdpcCode> {
    match alist.strip_prefix("builtin:") {
        Some(name) => {
            let text = shipped::by_name(name).with_context(|| format!("no shipped code named {name:?}"))?;
            Ok(LdpcCode::parse_alist(text)?)
        }
        None => Ok(LdpcCode::load_alist(alist)?),
    }
}

fn decode(out: &mut impl Write, alist: &str, max_iter: usize, input: Option<&Path>) -> Result<()> {
    let code = load_code(alist)?;
    let text = String::from_utf8(read_input(input)?)?;
    let llrs: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse().with_context(|| format!("invalid LLR {t:?}")))
        .collect::<Result<_>>()?;
    if llrs.len() != code.n() {
        bail!("expected {} LLRs, got {}", code.n(), llrs.len());
    }
    let graph = Arc::new(TannerGraph::new(code.h()));
    let outcome = BpDecoder::new(&graph).decode(&llrs, max_iter);
    writeln!(out, "{}", serde_json::to_string_pretty(&outcome)?)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceFile {
    m: u32,
    gamma: f64,
    rate: f64,
    snr_db: f64,
    #[serde(default)]
    amplitudes: Option<AmplitudeDistribution>,
    #[serde(default)]
    delta: Option<f64>,
}

fn plan_rate(out: &mut impl Write, path: &Path, rates: &[f64], labeling: LabelingKind) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ReferenceFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let c = AskConstellation::new(file.m, labeling)?;
    let reference = match (file.amplitudes, file.delta) {
        (Some(amplitudes), Some(delta)) => Reference {
            m: file.m,
            gamma: file.gamma,
            rate: file.rate,
            snr_db: file.snr_db,
            amplitudes,
            delta,
        },
        (None, None) => Reference::optimal(&c, file.gamma, file.rate, file.snr_db)?,
        _ => bail!("give both amplitudes and delta, or neither"),
    };
    let adapted = rates
        .iter()
        .map(|&r| adapt(&c, &reference, r))
        .collect::<pas_core::Result<Vec<_>>>()?;
    let json = if adapted.len() == 1 {
        serde_json::to_string_pretty(&adapted[0])?
    } else {
        serde_json::to_string_pretty(&adapted)?
    };
    writeln!(out, "{json}")?;
    Ok(())
}

fn sweep(out: &mut impl Write, sim: &SimArgs, snrs: &[f64], rates: &[f64]) -> Result<()> {
    let (cfg, base) = ModeConfig::load(&sim.mode)?;
    let modes: Vec<Mode> = if rates.is_empty() {
        vec![cfg.build(&base)?]
    } else {
        rates
            .iter()
            .map(|&r| {
                let mut c = cfg.clone();
                c.rate = Some(r);
                c.matcher_k = None;
                c.build(&base)
            })
            .collect::<pas_core::Result<_>>()?
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["Rate", "SNR [dB]", "Gap [dB]", "FER", "95% CI", "Frames", "Errors"])?;
    for mode in &modes {
        for &snr_db in snrs {
            let p: OperatingPoint = run_fer(mode, snr_db, sim.stop(), sim.seed);
            w.write_record([
                fmt4(p.rate),
                fmt4(p.snr_db),
                fmt4(p.gap_db),
                format!("{:.3e}", p.fer),
                format!("{:.3e}", p.ci95),
                p.frames.to_string(),
                p.errors.to_string(),
            ])?;
            w.flush()?;
        }
    }
    Ok(())
}

fn dump_frame(out: &mut impl Write, path: &Path, snr_db: Option<f64>, seed: u64, frame: u64) -> Result<()> {
    let (cfg, base) = ModeConfig::load(path)?;
    let Mode::Pas(mode) = cfg.build(&base)? else {
        bail!("frame dumps are available for PAS modes only");
    };
    let mode = mode.at_snr_db(snr_db.unwrap_or(cfg.snr_db));
    let mut rng = ChannelRng::new(seed, frame);
    let data = rng.bits(mode.data_bits());
    let x = mode.transmit(&data)?;
    let y = awgn(&x, &mut rng, 1.0);
    let trace = mode.trace(&data, &y)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&trace)?)?;
    Ok(())
}
