//! Parallel ensembles, sample and manifest files, and the `cwexit` command
//! line on top of [`cwexit_core`].

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod manifest;

pub use ensemble::{run_ensemble, EnsembleResult};
pub use error::{Error, Result};
