//! Trial fan-out. Results always come back in trial-index order, so any
//! reduction over them is independent of the worker count.

/// How trials are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon worker pool; `None` uses the global pool. Without the `parallel`
    /// feature this runs sequentially.
    Parallel {
        workers: Option<usize>,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Self::Parallel { workers: None }
        } else {
            Self::Sequential
        }
    }
}

impl Execution {
    /// `Some(1)` means sequential, `None` the default pool.
    pub fn from_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(0) | Some(1) => Self::Sequential,
            w => Self::Parallel { workers: w },
        }
    }

    pub fn map_trials<T, F>(self, trials: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        match self {
            Self::Sequential => (0..trials).map(f).collect(),
            Self::Parallel { workers } => parallel_map(workers, trials, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(workers: Option<usize>, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;

    let run = || (0..trials).into_par_iter().map(&f).collect();
    match workers {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build worker pool")
            .install(run),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(_workers: Option<usize>, trials: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..trials).map(f).collect()
}
