//! Execution mode for the data-parallel loops.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] runs on the
//! rayon pool; without it every mode falls back to the sequential path.
//! Results never depend on the mode: parallel collections preserve order.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this mode actually runs in parallel in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Order-preserving map over a slice.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Indices in `0..n` (in increasing order) for which `keep` holds.
    pub fn filter_range<F>(self, n: u64, keep: F) -> Vec<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n as usize)
                .into_par_iter()
                .with_min_len(1 << 12)
                .map(|i| i as u64)
                .filter(|&i| keep(i))
                .collect();
        }
        (0..n).filter(|&i| keep(i)).collect()
    }

    /// Smallest index in `0..n` satisfying `pred`, if any.
    pub fn find_first<F>(self, n: u64, pred: F) -> Option<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n as usize)
                .into_par_iter()
                .with_min_len(1 << 8)
                .map(|i| i as u64)
                .find_first(|&i| pred(i));
        }
        (0..n).find(|&i| pred(i))
    }
}
