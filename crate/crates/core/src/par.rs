//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these fan out over rayon; without it
//! they run plain loops. Every helper assigns each output element to exactly
//! one worker, so results are bit-identical regardless of feature or thread
//! count. Reductions that would depend on summation order stay sequential
//! elsewhere in the crate.

/// Thread count pinned via the `VOXMAE_THREADS` environment variable.
///
/// Call once at startup. With `parallel` enabled this sizes the global rayon
/// pool; the sequential build ignores it. Returns the pinned count, if any.
pub fn init_threads_from_env() -> Option<usize> {
    let n: usize = std::env::var("VOXMAE_THREADS").ok()?.parse().ok()?;
    if n == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        // Ignore the error if a pool already exists; thread count does not
        // affect results, only scheduling.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Some(n)
}

/// Apply `f` to every `cols`-wide row of `data`, in parallel when enabled.
#[cfg(feature = "parallel")]
pub fn for_each_row<T, F>(data: &mut [T], cols: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    use rayon::prelude::*;
    data.par_chunks_mut(cols)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_row<T, F>(data: &mut [T], cols: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    for (i, row) in data.chunks_mut(cols).enumerate() {
        f(i, row);
    }
}

/// Order-preserving parallel map over a slice.
#[cfg(feature = "parallel")]
pub fn map_indexed<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(usize, &I) -> O + Send + Sync,
{
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(usize, &I) -> O + Send + Sync,
{
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Order-preserving parallel map over indices `0..n`.
#[cfg(feature = "parallel")]
pub fn map_range<O, F>(n: usize, f: F) -> Vec<O>
where
    O: Send,
    F: Fn(usize) -> O + Send + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<O, F>(n: usize, f: F) -> Vec<O>
where
    O: Send,
    F: Fn(usize) -> O + Send + Sync,
{
    (0..n).map(f).collect()
}
