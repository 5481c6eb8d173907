//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) work is fanned out over a dedicated
//! rayon pool; without it every map runs in order on the calling thread.
//! Both paths return results in input order, so output never depends on
//! scheduling.

#[cfg(feature = "parallel")]
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Default)]
pub enum Executor {
    #[default]
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel(Arc<rayon::ThreadPool>),
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Executor::Sequential => write!(f, "Executor::Sequential"),
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => {
                write!(f, "Executor::Parallel({} workers)", pool.current_num_threads())
            }
        }
    }
}

impl Executor {
    /// Executor with `workers` threads. `0` means one per logical CPU and
    /// `1` is always sequential. Without the `parallel` feature this is
    /// always sequential.
    pub fn with_workers(workers: usize) -> Self {
        #[cfg(feature = "parallel")]
        {
            if workers == 1 {
                return Executor::Sequential;
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("failed to build worker pool");
            Executor::Parallel(Arc::new(pool))
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Executor::Sequential
        }
    }

    pub fn workers(&self) -> usize {
        match self {
            Executor::Sequential => 1,
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => pool.current_num_threads(),
        }
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => pool.install(|| items.par_iter().map(f).collect()),
        }
    }

    /// Maps `f` over `0..n`.
    pub fn map_range<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => pool.install(|| (0..n).into_par_iter().map(f).collect()),
        }
    }

    /// Applies `f` to fixed-size chunks of `data` in place; `f` receives the
    /// chunk index.
    pub fn for_each_chunk_mut<T, F>(&self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            Executor::Sequential => data
                .chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c)),
            #[cfg(feature = "parallel")]
            Executor::Parallel(pool) => pool.install(|| {
                data.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(i, c)| f(i, c))
            }),
        }
    }
}
