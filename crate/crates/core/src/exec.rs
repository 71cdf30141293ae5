//! Pluggable parallel map for assembly loops.

use alloc::vec::Vec;

/// Maps `f` over `0..n` and returns the results in index order. Each result
/// depends only on its index, so any implementation gives identical output.
pub trait Executor: Sync {
    fn map<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<R: Send>(&self, n: usize, f: &(dyn Fn(usize) -> R + Sync)) -> Vec<R> {
        (0..n).map(f).collect()
    }
}
