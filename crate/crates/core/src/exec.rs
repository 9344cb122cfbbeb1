//! Data-parallel loop helpers.
//!
//! Every reduction uses a fixed chunking, so results are bit-identical
//! between the parallel and the sequential path.

use std::cell::Cell;

thread_local! {
    static FORCE_SEQUENTIAL: Cell<bool> = const { Cell::new(false) };
}

const CHUNK: usize = 4096;

/// Run `f` with every helper in this module taking the sequential path on
/// the calling thread.
pub fn sequential<R>(f: impl FnOnce() -> R) -> R {
    let prev = FORCE_SEQUENTIAL.with(|c| c.replace(true));
    let out = f();
    FORCE_SEQUENTIAL.with(|c| c.set(prev));
    out
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && !FORCE_SEQUENTIAL.with(|c| c.get())
}

/// Size the global pool from `WEYLKIT_THREADS` if it is set. Calling this
/// after the pool was first used has no effect.
pub fn init_thread_pool() -> usize {
    let requested = std::env::var("WEYLKIT_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0);
    #[cfg(feature = "parallel")]
    {
        if let Some(t) = requested {
            if rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
                log::debug!("global thread pool already initialized");
            }
        }
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = requested;
        1
    }
}

/// `(0..len).map(f).collect()`.
pub fn map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().with_min_len(64).map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Fill `out[i] = f(i)`.
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        out.par_iter_mut()
            .with_min_len(256)
            .enumerate()
            .for_each(|(i, o)| *o = f(i));
        return;
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = f(i);
    }
}

/// Apply `f(chunk_index, chunk)` to consecutive chunks of `chunk` elements.
pub fn for_chunks<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
        return;
    }
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// `Σ_{i<len} f(i)` with deterministic summation order.
pub fn sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(CHUNK);
    let partial = map(blocks, |b| {
        let hi = ((b + 1) * CHUNK).min(len);
        (b * CHUNK..hi).map(&f).sum::<f64>()
    });
    partial.into_iter().sum()
}

/// `max_{i<len} f(i)`, or `f64::NEG_INFINITY` when empty.
pub fn max<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(CHUNK);
    map(blocks, |b| {
        let hi = ((b + 1) * CHUNK).min(len);
        (b * CHUNK..hi).map(&f).fold(f64::NEG_INFINITY, f64::max)
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

pub fn min<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    -max(len, |i| -f(i))
}
