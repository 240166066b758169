//! Thread-pool executor for the Monte Carlo drivers.

use qecsim_core::Executor;
use rayon::prelude::*;

/// Environment variable holding the worker count (default: all cores).
pub const WORKERS_ENV: &str = "QECSIM_WORKERS";

pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn new(workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        Self { pool }
    }

    /// Sized from `QECSIM_WORKERS`, or every core when unset or zero.
    pub fn from_env() -> anyhow::Result<Self> {
        let workers = match std::env::var(WORKERS_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| anyhow::anyhow!("{WORKERS_ENV} must be a non-negative integer, got {s:?}"))?,
            Err(_) => 0,
        };
        Ok(Self::new(workers))
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}
