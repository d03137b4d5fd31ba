//! Data-parallel helpers.
//!
//! Every helper preserves input order in its output, so callers get the
//! same bits whether the `parallel` feature is on or off and regardless of
//! the size of the rayon pool. Floating-point reductions are never done
//! inside these helpers; callers fold the ordered results sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f).collect()`, in parallel when enabled.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// `items.iter().map(f).collect()`, in parallel when enabled.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
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

/// Applies `f(chunk_index, chunk)` to consecutive mutable chunks.
pub fn for_each_chunk_mut<A, F>(items: &mut [A], chunk: usize, f: F)
where
    A: Send,
    F: Fn(usize, &mut [A]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        items
            .par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        items
            .chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}

/// Index of the maximum of `key` over `0..n`, ties to the smallest index.
///
/// The reduction is exact (no arithmetic on keys), so the answer does not
/// depend on how the range is split.
pub fn argmax_by_key<F>(n: usize, key: F) -> Option<usize>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let better = |a: (usize, f64), b: (usize, f64)| {
        if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(|i| (i, key(i)))
            .reduce_with(better)
            .map(|(i, _)| i)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(|i| (i, key(i))).reduce(better).map(|(i, _)| i)
    }
}
