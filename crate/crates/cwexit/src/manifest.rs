//! Run manifests: the fully resolved parameters of a `simulate` run, written
//! next to the sample file. A manifest can be passed back as `--config` to
//! reproduce the samples exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cwexit_core::sim::{Mode, SimConfig};
use serde::{Deserialize, Serialize};

use crate::config::{ModeName, Settings};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub subcommand: String,
    pub beta: f64,
    pub n: u64,
    pub mode: ModeName,
    /// Resolved threshold radius (`N^{-γ}` in theta mode).
    pub r: f64,
    pub gamma: Option<f64>,
    pub n_thr: u64,
    pub samples: usize,
    pub master_seed: u64,
    pub threads: usize,
    pub max_time: f64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        config: &SimConfig,
        samples: usize,
        master_seed: u64,
        threads: usize,
    ) -> Self {
        let (mode, gamma) = match config.mode() {
            Mode::Tau(_) => (ModeName::Tau, None),
            Mode::Theta { gamma } => (ModeName::Theta, Some(gamma)),
        };
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            beta: config.params().beta(),
            n: config.params().n_spins(),
            mode,
            r: config.radius(),
            gamma,
            n_thr: config.n_threshold(),
            samples,
            master_seed,
            threads,
            max_time: config.max_time(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    /// The settings that reproduce this run.
    pub fn settings(&self) -> Settings {
        Settings {
            beta: Some(self.beta),
            n: Some(self.n),
            mode: Some(self.mode),
            r: (self.mode == ModeName::Tau).then_some(self.r),
            gamma: self.gamma,
            samples: Some(self.samples),
            master_seed: Some(self.master_seed),
            threads: Some(self.threads),
            max_time: Some(self.max_time),
            ..Default::default()
        }
    }

    /// The simulation configuration of the run, checked against the recorded
    /// threshold count.
    pub fn sim_config(&self, path: &Path) -> Result<SimConfig> {
        let config = self.settings().resolve(&Settings::default())?.config;
        if config.n_threshold() != self.n_thr {
            return Err(Error::format(
                path,
                "n_thr does not match the recorded parameters",
            ));
        }
        Ok(config)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e))
    }
}

/// `runs/out.csv` → `runs/out.manifest.json`.
pub fn manifest_path(samples_path: &Path) -> PathBuf {
    samples_path.with_extension("manifest.json")
}
