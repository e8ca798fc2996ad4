//! Data-parallel map helpers.
//!
//! Everything that fans out over independent work items (policies, restarts,
//! grid points, tagged chains) goes through [`Exec`]. With the `parallel`
//! feature enabled, [`Exec::Parallel`] dispatches to rayon; without it the
//! variant still exists and runs sequentially, so callers never need `cfg`.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Maps `f` over an index range, preserving order.
    pub fn map_range<R, F>(self, range: Range<u64>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Like [`Exec::map_range`] but stops at the first error.
    pub fn try_map_range<R, E, F>(self, range: Range<u64>, f: F) -> Result<Vec<R>, E>
    where
        R: Send,
        E: Send,
        F: Fn(u64) -> Result<R, E> + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().map(f).collect()
            }
            _ => range.map(f).collect(),
        }
    }

    /// Executor for a `--jobs`-style limit: one job runs sequentially, more
    /// jobs size the global worker pool. Has to be called before any
    /// parallel work starts.
    pub fn with_jobs(jobs: usize) -> Result<Exec, String> {
        match jobs {
            0 => Err("--jobs must be at least 1".to_string()),
            1 => Ok(Exec::Sequential),
            #[cfg(feature = "parallel")]
            n => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map(|_| Exec::Parallel)
                .map_err(|e| e.to_string()),
            #[cfg(not(feature = "parallel"))]
            _ => Ok(Exec::Sequential),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let items: Vec<u32> = (0..1000).collect();
        let seq = Exec::Sequential.map(&items, |x| x * 3);
        let par = Exec::Parallel.map(&items, |x| x * 3);
        assert_eq!(seq, par);
        assert_eq!(
            Exec::Parallel.map_range(0..50, |i| i * i),
            Exec::Sequential.map_range(0..50, |i| i * i)
        );
    }

    #[test]
    fn try_map_short_circuits_to_error() {
        let r: Result<Vec<u64>, u64> =
            Exec::Sequential.try_map_range(0..10, |i| if i == 4 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(4));
    }
}
