//! Sample CSV files.
//!
//! Columns are `trajectory_id,seed,sign,exit_time,shifted_time,n_jumps,truncated`.
//! Floats are written in the shortest decimal form that parses back to the
//! same `f64`, so a file is reproducible byte for byte on every platform.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use cwexit_core::sim::ExitSample;
use serde::Deserialize;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "trajectory_id,seed,sign,exit_time,shifted_time,n_jumps,truncated";

/// One row of a sample file.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct SampleRow {
    pub trajectory_id: u64,
    pub seed: u64,
    pub sign: i8,
    pub exit_time: f64,
    pub shifted_time: f64,
    pub n_jumps: u64,
    pub truncated: bool,
}

impl SampleRow {
    pub fn new(trajectory_id: u64, sample: &ExitSample, shift: f64) -> Self {
        SampleRow {
            trajectory_id,
            seed: sample.seed,
            sign: sample.sign,
            exit_time: sample.exit_time,
            shifted_time: sample.exit_time - shift,
            n_jumps: sample.n_jumps,
            truncated: sample.truncated,
        }
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[SampleRow]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.trajectory_id, r.seed, r.sign, r.exit_time, r.shifted_time, r.n_jumps, r.truncated
        )?;
    }
    out.flush()
}

/// Writes the samples of one run; `shift` is the run's `time_shift()`.
pub fn write_samples(path: &Path, samples: &[ExitSample], shift: f64) -> Result<()> {
    let rows: Vec<SampleRow> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| SampleRow::new(i as u64, s, shift))
        .collect();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(BufWriter::new(file), &rows).map_err(|e| Error::io(path, e))
}

/// Reads a sample file. A missing file is an I/O error; a missing column or an
/// unparsable value is a format error.
pub fn read_samples(path: &Path) -> Result<Vec<SampleRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for row in reader.deserialize::<SampleRow>() {
        rows.push(row.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::format(path, e),
        })?);
    }
    if rows.is_empty() {
        return Err(Error::format(path, "no sample rows"));
    }
    if rows.iter().any(|r| r.sign != 1 && r.sign != -1) {
        return Err(Error::format(path, "sign must be 1 or -1"));
    }
    Ok(rows)
}
