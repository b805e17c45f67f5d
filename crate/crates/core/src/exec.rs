//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel loop in the crate goes through [`map_indexed`], which
//! always returns results in index order. Reductions are then performed
//! sequentially by the caller, so outputs are bitwise identical whatever the
//! thread count or scheduling.

/// How to evaluate an indexed workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, and
    /// degrades to sequential evaluation otherwise.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Runs `op` on a dedicated pool with `threads` workers. `None` uses the
/// global pool. Without the `parallel` feature this simply calls `op`.
pub fn with_threads<R: Send>(threads: Option<usize>, op: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => return pool.install(op),
            Err(err) => log::warn!("falling back to the global pool: {err}"),
        }
    }
    let _ = threads;
    op()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let seq = map_indexed(1000, Execution::Sequential, |i| i * i);
        let par = map_indexed(1000, Execution::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(par[31], 961);
    }

    #[test]
    fn pool_size_does_not_change_results() {
        let a = with_threads(Some(1), || map_indexed(257, Execution::Parallel, |i| (i as f64).sqrt()));
        let b = with_threads(Some(4), || map_indexed(257, Execution::Parallel, |i| (i as f64).sqrt()));
        assert_eq!(a, b);
    }
}
