//! Parallel ensembles whose output does not depend on the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::thread;
use std::time::{Duration, Instant};

use cwexit_core::sim::{derive_seed, ExitSample, Sampler, SimConfig};

use crate::error::{Error, Result};

/// Trajectories handed to a worker at a time.
const CHUNK: usize = 64;

/// Chunks finished by one worker, keyed by chunk index.
type WorkerOutput = Vec<(usize, Vec<ExitSample>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub config: SimConfig,
    pub master_seed: u64,
    /// Ordered by trajectory index; sample `i` was run with `derive_seed(master_seed, i)`.
    pub samples: Vec<ExitSample>,
    pub wall_time: Duration,
}

impl EnsembleResult {
    pub fn truncated(&self) -> usize {
        self.samples.iter().filter(|s| s.truncated).count()
    }
}

/// Worker count from `CW_THREADS`, falling back to the available parallelism.
pub fn default_workers() -> usize {
    std::env::var("CW_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `n_samples` trajectories on `workers` threads.
///
/// The result equals the sequential loop over `derive_seed(master_seed, i)`
/// for every worker count: workers claim fixed chunks of indices from a shared
/// counter and the chunks are put back in index order.
pub fn run_ensemble(
    config: &SimConfig,
    master_seed: u64,
    n_samples: usize,
    workers: usize,
) -> Result<EnsembleResult> {
    if n_samples == 0 {
        return Err(Error::Usage("sample count must be at least 1".into()));
    }
    if workers == 0 {
        return Err(Error::Usage("worker count must be at least 1".into()));
    }
    let start = Instant::now();
    let sampler = Sampler::new(*config)?;
    let n_chunks = n_samples.div_ceil(CHUNK);
    let workers = workers.min(n_chunks);
    let next = AtomicUsize::new(0);

    let run_chunk = |chunk: usize| -> Vec<ExitSample> {
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(n_samples);
        (lo..hi)
            .map(|i| sampler.sample(derive_seed(master_seed, i as u64)))
            .collect()
    };

    let outcomes: Vec<thread::Result<WorkerOutput>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let chunk = next.fetch_add(1, Ordering::Relaxed);
                        if chunk >= n_chunks {
                            return done;
                        }
                        done.push((chunk, run_chunk(chunk)));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join()).collect()
    });

    let mut chunks: Vec<Option<Vec<ExitSample>>> = vec![None; n_chunks];
    let mut failed = false;
    for outcome in outcomes {
        match outcome {
            Ok(done) => {
                for (chunk, samples) in done {
                    chunks[chunk] = Some(samples);
                }
            }
            Err(_) => failed = true,
        }
    }
    if failed {
        let completed = chunks.iter().flatten().map(Vec::len).sum();
        return Err(Error::WorkerFailed {
            completed,
            requested: n_samples,
        });
    }
    let samples = chunks.into_iter().flatten().flatten().collect();
    Ok(EnsembleResult {
        config: *config,
        master_seed,
        samples,
        wall_time: start.elapsed(),
    })
}
