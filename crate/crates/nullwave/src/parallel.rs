//! Fan-out of independent runs over a bounded worker pool.

use rayon::prelude::*;

use crate::error::{CliError, Result};

/// Environment variable capping the number of concurrent runs.
pub const THREADS_VAR: &str = "NULLWAVE_THREADS";

/// Worker count: `NULLWAVE_THREADS` if set, else the available parallelism.
pub fn worker_threads() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::config(THREADS_VAR, format!("must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Maps `f` over `items` on at most [`worker_threads`] threads. Results keep
/// the input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads()?)
        .build()
        .map_err(|e| CliError::config(THREADS_VAR, e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}
