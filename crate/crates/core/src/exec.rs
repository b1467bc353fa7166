//! Execution strategy for the per-bin spectral loops.
//!
//! Every hot loop in the crate maps an independent, pure computation over
//! grid bins (symbol-matrix assembly, whitening, eigensolves) or over sweep
//! points. With the default `parallel` feature the maps run on rayon's
//! work-stealing pool; without it they run sequentially. Results are
//! collected in index order either way, so outputs are bit-identical across
//! both modes and across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n` and collect results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Map `f` over `0..n` and collect results in index order (sequential build).
#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
