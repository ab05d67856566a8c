use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::rng::{child_seed, trial_stream};

pub(crate) struct Outcome<T> {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub result: Result<T>,
}

/// Seed of trial `trial` at size `n`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    child_seed(master, trial_stream(n, trial))
}

/// Worker count from `RMLAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("RMLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
}

/// Runs `op` on a pool capped by `RMLAB_THREADS`, or on the global pool.
pub fn with_thread_cap<R: Send>(op: impl FnOnce() -> R + Send) -> Result<R> {
    match thread_cap() {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| LabError::Resource(format!("thread pool: {e}")))?;
            Ok(pool.install(op))
        }
        None => Ok(op()),
    }
}

/// Evaluates `f(n, seed)` for every `(n, trial)`; results are in
/// `(size order, trial)` order whatever the scheduling.
pub(crate) fn run_trials<T, F>(sizes: &[usize], trials: usize, master: u64, f: F) -> Result<Vec<Outcome<T>>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    let jobs: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&n| (0..trials).map(move |t| (n, t)))
        .collect();
    with_thread_cap(|| {
        jobs.par_iter()
            .with_max_len(1)
            .map(|&(n, trial)| {
                let seed = trial_seed(master, n, trial);
                Outcome {
                    n,
                    trial,
                    seed,
                    result: f(n, seed),
                }
            })
            .collect()
    })
}
