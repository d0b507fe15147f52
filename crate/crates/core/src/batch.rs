//! Batch execution of independent cases.
//!
//! Single runs are inherently sequential (each step depends on the
//! previous one), but ratio sweeps, comparison-table rows, and repeated
//! validation runs share nothing. [`map_collect`] fans such work out
//! with rayon when the `parallel` feature (default) is enabled and
//! degrades to plain iteration otherwise; [`map_collect_seq`] is always
//! sequential, kept as the baseline the benchmark suite compares
//! against. Output order matches input order in every case.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is
/// enabled.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is
/// enabled.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential baseline with the same signature contract as
/// [`map_collect`].
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_input_order() {
        let xs: Vec<u64> = (0..64).collect();
        let par = map_collect(&xs, |&x| x * x);
        let seq = map_collect_seq(&xs, |&x| x * x);
        assert_eq!(par, seq);
        assert_eq!(par[10], 100);
    }
}
