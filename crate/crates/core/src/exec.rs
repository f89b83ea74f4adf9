//! Cell-loop execution helpers.
//!
//! With the `parallel` feature, large cell loops are split across the rayon
//! pool. Reductions always go through the same fixed chunk tree (sequential
//! sum inside each chunk, then a sequential sum of the chunk partials), so
//! results are bitwise identical whichever execution mode is used.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Cells per work unit, for both maps and reductions.
pub const CHUNK: usize = 1024;

/// Loops shorter than this never leave the calling thread.
const PAR_MIN_LEN: usize = 4 * CHUNK;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise the same
    /// as `Sequential`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    #[inline]
    fn split(self, len: usize) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel && len >= PAR_MIN_LEN
    }
}

/// `out[i] = f(i)` for every cell.
pub fn fill<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if exec.split(out.len()) {
        #[cfg(feature = "parallel")]
        out.par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * CHUNK;
                for (k, v) in chunk.iter_mut().enumerate() {
                    *v = f(base + k);
                }
            });
    } else {
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }
}

/// Deterministic sum of `f(i)` for `i in 0..len`.
pub fn sum<F>(exec: Execution, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunk_sum = |c: usize| {
        let end = ((c + 1) * CHUNK).min(len);
        let mut acc = 0.0;
        for i in c * CHUNK..end {
            acc += f(i);
        }
        acc
    };
    let chunks = len.div_ceil(CHUNK);
    if exec.split(len) {
        #[cfg(feature = "parallel")]
        {
            let partials: Vec<f64> = (0..chunks).into_par_iter().map(chunk_sum).collect();
            return partials.iter().sum();
        }
    }
    (0..chunks).map(chunk_sum).sum()
}

/// Deterministic maximum of `f(i)`; `f64::NEG_INFINITY` for an empty range.
pub fn max<F>(exec: Execution, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if exec.split(len) {
        #[cfg(feature = "parallel")]
        {
            return (0..len)
                .into_par_iter()
                .map(&f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
    }
    (0..len).map(f).fold(f64::NEG_INFINITY, f64::max)
}

/// Runs `f` over items, in parallel when allowed. Output order matches input.
pub fn map_items<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if cfg!(feature = "parallel") && exec == Execution::Parallel && items.len() > 1 {
        #[cfg(feature = "parallel")]
        {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}
