//! Data-parallel map with a sequential fallback. Results are collected in
//! index order either way, so callers see identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Rayon's global pool. Falls back to sequential without the `parallel` feature.
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Like `map`, with per-worker scratch state built by `init`.
    pub fn map_init<S, T, I, F>(self, n: usize, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                let min_len = n.div_ceil(rayon::current_num_threads()).max(1);
                (0..n).into_par_iter().with_min_len(min_len).map_init(&init, |s, i| f(s, i)).collect()
            }
            _ => {
                let mut s = init();
                (0..n).map(|i| f(&mut s, i)).collect()
            }
        }
    }
}
