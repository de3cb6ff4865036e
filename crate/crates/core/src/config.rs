//! TOML mode configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constellation::{AskConstellation, LabelingKind};
use crate::error::{Error, Result};
use crate::ldpc::{shipped, LdpcCode, SystematicCode};
use crate::numeric::db_to_linear;
use crate::pipeline::{BicmMode, BitMapper, Link, PasDesign, PasMode, DEFAULT_MAX_ITER};
use crate::shaping::{optimize_input, ShapedInput};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Pas,
    Uniform,
}

/// A link configuration.
///
/// `alist` is a path relative to the configuration file, or `builtin:<name>`
/// for a shipped code. The amplitude distribution is the MI-optimal input at
/// `snr_db`; with `rate` set it is tilted to carry that many bits per symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub scheme: Scheme,
    pub m: u32,
    #[serde(default = "default_labeling")]
    pub labeling: LabelingKind,
    pub alist: String,
    pub snr_db: f64,
    #[serde(default)]
    pub rate: Option<f64>,
    #[serde(default)]
    pub matcher_k: Option<u64>,
    #[serde(default)]
    pub bitmapper: Option<String>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_labeling() -> LabelingKind {
    LabelingKind::Brgc
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

/// A configured link of either scheme.
#[derive(Clone, Debug)]
pub enum Mode {
    Pas(PasMode),
    Uniform(BicmMode),
}

impl ModeConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative alist paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_toml(&text)?, base))
    }

    pub fn load_code(&self, base: &Path) -> Result<LdpcCode> {
        match self.alist.strip_prefix("builtin:") {
            Some(name) => {
                let text = shipped::by_name(name)
                    .ok_or_else(|| Error::Config(format!("no shipped code named {name:?}")))?;
                LdpcCode::parse_alist(text)
            }
            None => LdpcCode::load_alist(base.join(&self.alist)),
        }
    }

    pub fn build(&self, base: &Path) -> Result<Mode> {
        let constellation = AskConstellation::new(self.m, self.labeling)?;
        let code = Arc::new(self.load_code(base)?.systematize()?);
        let mode = match self.scheme {
            Scheme::Pas => Mode::Pas(self.build_pas(constellation, code)?),
            Scheme::Uniform => Mode::Uniform(
                BicmMode::new(&constellation, code)?
                    .with_max_iter(self.max_iter)
                    .at_snr_db(self.snr_db),
            ),
        };
        Ok(match (mode, &self.name) {
            (Mode::Pas(p), Some(n)) => Mode::Pas(p.with_id(n)),
            (Mode::Uniform(b), Some(n)) => Mode::Uniform(b.with_id(n)),
            (mode, None) => mode,
        })
    }

    fn build_pas(&self, constellation: AskConstellation, code: Arc<SystematicCode>) -> Result<PasMode> {
        let mut design = PasDesign::new(constellation.clone(), code);
        if let Some(b) = &self.bitmapper {
            let mapper: BitMapper = b.parse()?;
            if mapper.m() != self.m {
                return Err(Error::InvalidBitMapper(mapper.level_order().to_vec()));
            }
            design.bitmapper = mapper;
        }
        let reference = optimize_input(&constellation, db_to_linear(self.snr_db))?;
        let mode = match self.rate {
            Some(rate) => design.mode_for_rate(reference.amplitude_distribution(), rate)?,
            None => design.mode_with(reference.amplitude_distribution(), self.matcher_k)?,
        };
        let mode = mode.with_max_iter(self.max_iter).at_snr_db(self.snr_db);
        Ok(match self.delta {
            Some(d) => mode.with_delta(d),
            None => mode,
        })
    }
}

impl Link for Mode {
    fn id(&self) -> &str {
        match self {
            Mode::Pas(m) => m.id(),
            Mode::Uniform(m) => m.id(),
        }
    }

    fn data_bits(&self) -> usize {
        match self {
            Mode::Pas(m) => m.data_bits(),
            Mode::Uniform(m) => m.data_bits(),
        }
    }

    fn frame_len(&self) -> usize {
        match self {
            Mode::Pas(m) => m.frame_len(),
            Mode::Uniform(m) => m.frame_len(),
        }
    }

    fn design(&self) -> &ShapedInput {
        match self {
            Mode::Pas(m) => m.design(),
            Mode::Uniform(m) => m.design(),
        }
    }

    fn gamma(&self) -> f64 {
        match self {
            Mode::Pas(m) => m.gamma(),
            Mode::Uniform(m) => m.gamma(),
        }
    }

    fn transmit(&self, data: &[u8]) -> Result<Vec<f64>> {
        match self {
            Mode::Pas(m) => m.transmit(data),
            Mode::Uniform(m) => m.transmit(data),
        }
    }

    fn receive(&self, y: &[f64]) -> Result<Vec<u8>> {
        match self {
            Mode::Pas(m) => m.receive(y),
            Mode::Uniform(m) => m.receive(y),
        }
    }

    fn at_snr_db(&self, snr_db: f64) -> Self {
        match self {
            Mode::Pas(m) => Mode::Pas(m.at_snr_db(snr_db)),
            Mode::Uniform(m) => Mode::Uniform(m.at_snr_db(snr_db)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_builds_the_toy_mode() {
        let cfg = ModeConfig::from_toml(
            r#"
            m = 3
            alist = "builtin:peg_n1008_r2_3"
            snr_db = 11.0
            rate = 1.75
            bitmapper = "(3,2,1)"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.labeling, LabelingKind::Brgc);
        let Mode::Pas(mode) = cfg.build(Path::new(".")).unwrap() else {
            panic!("expected PAS");
        };
        assert_eq!(mode.n_c(), 336);
        assert_eq!(mode.data_bits(), 588);
        assert!((mode.snr_db() - 11.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_unknown_keys_and_codes() {
        assert!(ModeConfig::from_toml("m = 3\nalist = \"x\"\nsnr_db = 1\nbogus = 2").is_err());
        let cfg = ModeConfig::from_toml("m = 3\nalist = \"builtin:nope\"\nsnr_db = 1").unwrap();
        assert!(cfg.build(Path::new(".")).is_err());
    }
}
