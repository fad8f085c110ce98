//! Data-parallel evaluation with a sequential fallback.
//!
//! Every fan-out in the crate goes through [`map_indexed`], which writes each
//! result into the slot of its index. Reductions are performed afterwards in
//! index order, so the worker count never changes a result.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses the rayon global pool (or the pool installed by the caller).
    /// Without the `parallel` feature this runs sequentially.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(execution: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = execution;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] over a slice.
pub fn map_slice<S, T, F>(execution: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    map_indexed(execution, items.len(), |i| f(&items[i]))
}
