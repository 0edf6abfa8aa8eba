//! Row-parallel execution helpers.
//!
//! Every kernel in the crate goes through these helpers so the rayon path and
//! the sequential path produce bit-identical results: stencils write disjoint
//! rows, and reductions use a fixed chunking followed by a pairwise tree.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of elements folded sequentially before the pairwise tree takes over.
pub const SUM_CHUNK: usize = 1024;

/// Fields smaller than this are always processed sequentially.
#[cfg(feature = "parallel")]
const PAR_MIN_LEN: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
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
    #[cfg(feature = "parallel")]
    fn use_threads(self, len: usize) -> bool {
        self == Execution::Parallel && len >= PAR_MIN_LEN
    }
}

/// Calls `f(row, out_row)` for every row of a row-major buffer.
pub fn for_each_row<F>(exec: Execution, out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.use_threads(out.len()) {
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    out.chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Elementwise map over zipped slices, `out[i] = f(i)`.
pub fn fill<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.use_threads(out.len()) {
        out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
        return;
    }
    let _ = exec;
    out.iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
}

/// `out[i] = f(i, out[i])`.
pub fn fill_in_place<F>(exec: Execution, out: &mut [f64], f: F)
where
    F: Fn(usize, f64) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.use_threads(out.len()) {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, v)| *v = f(i, *v));
        return;
    }
    let _ = exec;
    out.iter_mut().enumerate().for_each(|(i, v)| *v = f(i, *v));
}

/// `f(&mut a[i], &mut b[i], i)` for every index; `a` and `b` have equal length.
pub fn update_pair<F>(exec: Execution, a: &mut [f64], b: &mut [f64], f: F)
where
    F: Fn(&mut f64, &mut f64, usize) + Sync + Send,
{
    debug_assert_eq!(a.len(), b.len());
    #[cfg(feature = "parallel")]
    if exec.use_threads(a.len()) {
        a.par_iter_mut()
            .zip(b.par_iter_mut())
            .enumerate()
            .for_each(|(i, (x, y))| f(x, y, i));
        return;
    }
    let _ = exec;
    a.iter_mut()
        .zip(b.iter_mut())
        .enumerate()
        .for_each(|(i, (x, y))| f(x, y, i));
}

/// Deterministic sum of `f(i)` for `i in 0..len`.
pub fn sum_by<F>(exec: Execution, len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunk_sum = |c: usize| {
        let start = c * SUM_CHUNK;
        let end = (start + SUM_CHUNK).min(len);
        (start..end).fold(0.0, |acc, i| acc + f(i))
    };
    let n_chunks = len.div_ceil(SUM_CHUNK);
    let partials: Vec<f64> = {
        #[cfg(feature = "parallel")]
        {
            if exec.use_threads(len) {
                (0..n_chunks).into_par_iter().map(chunk_sum).collect()
            } else {
                (0..n_chunks).map(chunk_sum).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = exec;
            (0..n_chunks).map(chunk_sum).collect()
        }
    };
    pairwise(&partials)
}

/// Deterministic dot product.
pub fn dot(exec: Execution, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum_by(exec, a.len(), |i| a[i] * b[i])
}

fn pairwise(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise(l) + pairwise(r)
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers. Without the `parallel`
/// feature the closure simply runs on the calling thread.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
        {
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

/// Maps `f` over `items`, in parallel when the feature is enabled. Output
/// order always matches input order.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
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
