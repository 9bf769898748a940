//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (default) the `map_*` functions fan out over
//! rayon; without it they fall back to the sequential versions. Results are
//! collected in input order either way, so callers see identical output
//! regardless of thread count. The `*_seq` variants are always sequential and
//! exist so benches can compare both paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over a slice, in parallel when enabled.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sequential twin of [`map`].
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Produce `n` values from an index-driven generator, in parallel when
/// enabled. Generators derive any randomness from the index, which keeps the
/// output independent of scheduling.
pub fn generate<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential twin of [`generate`].
pub fn generate_seq<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}
