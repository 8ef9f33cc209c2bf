//! Execution backends for embarrassingly parallel loops.
//!
//! With the `parallel` feature, [`Execution::Parallel`] dispatches to rayon's
//! global (or installed) pool. Without it, every mode runs sequentially.
//! Reductions used by the estimator are exact integer sums, so the result does
//! not depend on the mode or the thread count.

/// How an index range is traversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Maps `0..n` through `map` and folds the results with an associative `merge`.
    pub fn map_reduce<T, M, R>(self, n: usize, identity: fn() -> T, map: M, merge: R) -> T
    where
        T: Send,
        M: Fn(usize) -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(map).reduce(identity, merge)
            }
            _ => (0..n).map(map).fold(identity(), merge),
        }
    }

    /// Maps `0..n` through `map`, preserving index order.
    pub fn map_collect<T, M>(self, n: usize, map: M) -> Vec<T>
    where
        T: Send,
        M: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(map).collect()
            }
            _ => (0..n).map(map).collect(),
        }
    }
}

/// Runs `f` inside a dedicated pool of `threads` workers.
///
/// Sequential builds simply call `f`.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Number of worker threads the current context would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
