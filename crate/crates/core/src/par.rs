//! Thin data-parallel layer.
//!
//! Every helper here has a deterministic result: reductions pick the least
//! index among equal keys, so the output never depends on scheduling. With
//! the `parallel` feature off the same functions run on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..len`, preserving order.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
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

/// Index of the first element of `0..len` (in index order) for which `f`
/// returns `Some`, together with that value.
pub fn find_first<T, F>(len: usize, f: F) -> Option<(usize, T)>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .filter_map(|i| f(i).map(|t| (i, t)))
            .find_first(|_| true)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).find_map(|i| f(i).map(|t| (i, t)))
    }
}

/// Minimum of `key(i)` over `0..len`; ties go to the smallest index.
pub fn min_by_key<K, F>(len: usize, key: F) -> Option<(usize, K)>
where
    K: Ord + Send,
    F: Fn(usize) -> K + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len)
            .into_par_iter()
            .map(|i| (key(i), i))
            .min()
            .map(|(k, i)| (i, k))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(|i| (key(i), i)).min().map(|(k, i)| (i, k))
    }
}

/// Runs `f` on a single worker thread. Used by benchmarks to compare the
/// parallel paths against sequential execution within one binary.
pub fn sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("single-thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_ties_pick_first_index() {
        let keys = [3, 1, 4, 1, 5];
        assert_eq!(min_by_key(keys.len(), |i| keys[i]), Some((1, 1)));
        assert_eq!(min_by_key(0, |i| i), None);
    }

    #[test]
    fn find_first_is_ordered() {
        let hit = find_first(100, |i| (i % 7 == 3).then_some(i * 2));
        assert_eq!(hit, Some((3, 6)));
    }

    #[test]
    fn sequential_matches_parallel() {
        let a = map_range(50, |i| i * i);
        let b = sequential(|| map_range(50, |i| i * i));
        assert_eq!(a, b);
    }
}
