//! Data-parallel map over independent work items, with a sequential
//! fallback when the `parallel` feature is disabled.
//!
//! Work items write into per-index slots, so the output is identical for
//! any schedule.

#[cfg(feature = "parallel")]
pub(crate) fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..len).map(f).collect()
}

/// Runs `f` with parallelism confined to a single thread. Used where a
/// measurement or comparison explicitly asks for the serial algorithm.
#[cfg(feature = "parallel")]
pub fn run_serial<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn run_serial<T>(f: impl FnOnce() -> T) -> T {
    f()
}
