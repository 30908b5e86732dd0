//! Data-parallel map over independent cells.
//!
//! Output order always matches input order, so campaign reports do not
//! depend on scheduling. With the `parallel` feature the map runs on rayon,
//! capped by `UNISON_THREADS` when set; without it everything is sequential.

pub const THREADS_ENV: &str = "UNISON_THREADS";

/// Thread cap from `UNISON_THREADS`, ignoring unparsable or zero values.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&k: &usize| k > 0)
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    use rayon::prelude::*;
    match thread_cap() {
        Some(1) => map_sequential(items, f),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => map_sequential(items, f),
        },
        None => items.par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    map_sequential(items, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Send + Sync,
    {
        match self {
            Execution::Parallel => map_parallel(items, f),
            Execution::Sequential => map_sequential(items, f),
        }
    }
}
