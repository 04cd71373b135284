//! Execution strategy for per-path work.

use alloc::vec::Vec;

/// Maps a pure per-path function over path indices.
///
/// Implementations may run in parallel but must return results in index
/// order, so that reductions are independent of scheduling.
pub trait PathExecutor: Sync {
    fn map_indices<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl PathExecutor for Sequential {
    fn map_indices<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}
