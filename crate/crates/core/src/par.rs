//! Data-parallel helpers. With the `parallel` feature these dispatch to rayon,
//! otherwise they run the same closures sequentially. Reductions are chunked
//! with a fixed chunk size so floating-point results do not depend on the
//! number of worker threads.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

pub fn num_threads() -> usize {
    #[cfg(feature = "parallel")]
    return rayon::current_num_threads();

    #[cfg(not(feature = "parallel"))]
    return 1;
}

/// Apply `f` to every `chunk`-sized piece of `data` together with its index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));

    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Like [`for_each_chunk_mut`] but each worker gets a scratch buffer built by `init`.
pub fn for_each_chunk_mut_with<T, S, I, F>(data: &mut [T], chunk: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Send + Sync,
    F: Fn(&mut S, usize, &mut [T]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each_init(&init, |s, (i, c)| f(s, i, c));

    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(&mut s, i, c));
    }
}

/// Map every element of `out` from its index.
pub fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    for_each_chunk_mut(out, REDUCE_CHUNK, |ci, c| {
        let base = ci * REDUCE_CHUNK;
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = f(base + k);
        }
    });
}

/// Replace every element by `f(index, old value)`.
pub fn fill_indexed_in_place<T, F>(data: &mut [T], f: F)
where
    T: Copy + Send,
    F: Fn(usize, T) -> T + Send + Sync,
{
    for_each_chunk_mut(data, REDUCE_CHUNK, |ci, c| {
        let base = ci * REDUCE_CHUNK;
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = f(base + k, *slot);
        }
    });
}

/// Deterministic sum of `f` over `data`: fixed-size chunks are summed
/// (possibly in parallel) and the partial sums are added in order.
pub fn sum_by<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Send + Sync,
{
    let partial = |c: &[T]| c.iter().map(&f).sum::<f64>();

    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = data.par_chunks(REDUCE_CHUNK).map(partial).collect();

    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = data.chunks(REDUCE_CHUNK).map(partial).collect();

    partials.into_iter().sum()
}

/// Maximum of `f` over `data` (order-independent, so trivially deterministic).
pub fn max_by<T, F>(data: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return data.par_iter().map(f).reduce(|| 0.0, f64::max);

    #[cfg(not(feature = "parallel"))]
    return data.iter().map(f).fold(0.0, f64::max);
}

/// Ordered parallel map over a slice of independent tasks.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();

    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}
