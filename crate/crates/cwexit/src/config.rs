//! Resolution of simulation settings from flags, a JSON config file, and
//! built-in defaults, in that order of precedence.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use cwexit_core::sim::{Mode, SimConfig, ThresholdSpec};
use cwexit_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 1.5;
pub const DEFAULT_N: u64 = 1000;
pub const DEFAULT_R_FRAC: f64 = 0.5;
pub const DEFAULT_GAMMA: f64 = 0.35;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Tau,
    Theta,
}

/// Every setting of a simulation, each optional. Used both for the parsed
/// flags and for `--config` files; a run manifest is a valid config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub beta: Option<f64>,
    pub n: Option<u64>,
    pub mode: Option<ModeName>,
    pub r: Option<f64>,
    pub r_frac: Option<f64>,
    pub gamma: Option<f64>,
    pub samples: Option<usize>,
    pub master_seed: Option<u64>,
    pub threads: Option<usize>,
    pub max_time: Option<f64>,
    pub out: Option<PathBuf>,
    // Written by manifests for the record; recomputed on every run.
    #[serde(skip_serializing)]
    pub version: Option<serde_json::Value>,
    #[serde(skip_serializing)]
    pub subcommand: Option<serde_json::Value>,
    #[serde(skip_serializing)]
    pub n_thr: Option<serde_json::Value>,
    #[serde(skip_serializing)]
    pub timestamp: Option<serde_json::Value>,
}

/// Fully resolved settings of one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub config: SimConfig,
    pub samples: usize,
    pub master_seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }

    fn threshold(&self) -> Result<Option<ThresholdSpec>> {
        match (self.r, self.r_frac) {
            (Some(_), Some(_)) => Err(Error::Usage("give either r or r_frac, not both".into())),
            (Some(r), None) => Ok(Some(ThresholdSpec::Absolute(r))),
            (None, Some(f)) => Ok(Some(ThresholdSpec::FractionOfMStar(f))),
            (None, None) => Ok(None),
        }
    }

    /// `self` wins over `file`, which wins over the defaults. `r` and `r_frac`
    /// count as one setting, so a flag of either kind replaces both in the file.
    pub fn resolve(&self, file: &Settings) -> Result<Resolved> {
        let beta = self.beta.or(file.beta).unwrap_or(DEFAULT_BETA);
        let n = self.n.or(file.n).unwrap_or(DEFAULT_N);
        let mode = self.mode.or(file.mode).unwrap_or(ModeName::Tau);
        let params = ModelParams::low_temperature(beta, n)?;
        let mode = match mode {
            ModeName::Tau => {
                let spec = match self.threshold()? {
                    Some(spec) => spec,
                    None => file
                        .threshold()?
                        .unwrap_or(ThresholdSpec::FractionOfMStar(DEFAULT_R_FRAC)),
                };
                Mode::Tau(spec)
            }
            ModeName::Theta => {
                if self.r.is_some() || self.r_frac.is_some() {
                    return Err(Error::Usage(
                        "--r and --r-frac only apply to tau mode".into(),
                    ));
                }
                Mode::Theta {
                    gamma: self.gamma.or(file.gamma).unwrap_or(DEFAULT_GAMMA),
                }
            }
        };
        let mut config = SimConfig::new(params, mode)?;
        if let Some(max_time) = self.max_time.or(file.max_time) {
            config = config.with_max_time(max_time)?;
        }
        let samples = self.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(Error::Usage("sample count must be at least 1".into()));
        }
        let threads = self.threads.or(file.threads);
        if threads == Some(0) {
            return Err(Error::Usage("thread count must be at least 1".into()));
        }
        Ok(Resolved {
            config,
            samples,
            master_seed: self
                .master_seed
                .or(file.master_seed)
                .unwrap_or(DEFAULT_SEED),
            threads,
            out: self.out.clone().or_else(|| file.out.clone()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults() {
        let file = Settings {
            beta: Some(2.0),
            n: Some(500),
            samples: Some(7),
            ..Default::default()
        };
        let flags = Settings {
            n: Some(100),
            ..Default::default()
        };
        let r = flags.resolve(&file).unwrap();
        assert_eq!(r.config.params().beta(), 2.0);
        assert_eq!(r.config.params().n_spins(), 100);
        assert_eq!(r.samples, 7);
        assert_eq!(r.master_seed, DEFAULT_SEED);
    }

    #[test]
    fn threshold_flag_replaces_file_threshold() {
        let file = Settings {
            r: Some(0.3),
            ..Default::default()
        };
        let flags = Settings {
            r_frac: Some(0.5),
            ..Default::default()
        };
        let r = flags.resolve(&file).unwrap();
        assert_eq!(
            r.config.mode(),
            Mode::Tau(ThresholdSpec::FractionOfMStar(0.5))
        );
        let both = Settings {
            r: Some(0.3),
            r_frac: Some(0.5),
            ..Default::default()
        };
        assert!(both.resolve(&Settings::default()).is_err());
    }

    #[test]
    fn theta_ignores_file_radius() {
        let file = Settings {
            r: Some(0.3),
            gamma: Some(0.4),
            ..Default::default()
        };
        let flags = Settings {
            mode: Some(ModeName::Theta),
            ..Default::default()
        };
        let r = flags.resolve(&file).unwrap();
        assert_eq!(r.config.mode(), Mode::Theta { gamma: 0.4 });
        let bad = Settings {
            mode: Some(ModeName::Theta),
            r: Some(0.3),
            ..Default::default()
        };
        assert!(bad.resolve(&Settings::default()).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<Settings>(r#"{"beta": 1.5, "bta": 2}"#).is_err());
        let s: Settings = serde_json::from_str(r#"{"beta": 1.5, "version": "0.1.0"}"#).unwrap();
        assert_eq!(s.beta, Some(1.5));
    }
}
