//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) jobs are dispatched onto a rayon
//! pool; without it every helper degrades to a plain sequential loop with the
//! same output ordering, so results never depend on which path ran.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SHIFTBENCH_THREADS";

/// How a batch of independent jobs is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Worker count requested through [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => parallel_map(n, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    match thread_cap() {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(err) => {
                log::warn!("could not build a {threads}-thread pool ({err}); using the global pool");
                (0..n).into_par_iter().map(&f).collect()
            }
        },
        None => (0..n).into_par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Whether the crate was built with the rayon backend.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
