//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature (default) the helpers dispatch to rayon unless
//! sequential execution has been requested through [`set_parallel`]. Without
//! the feature everything runs on the calling thread.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Enable or disable parallel execution at runtime. Has no effect when the
/// crate is built without the `parallel` feature.
pub fn set_parallel(enabled: bool) {
    PARALLEL.store(enabled, Ordering::Relaxed);
}

/// Whether the helpers below will use the rayon pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::Relaxed)
}

/// `(0..len).map(f).collect()`, possibly in parallel. Output order is preserved.
pub fn map_range<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Map over a slice, possibly in parallel. Output order is preserved.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Apply `f(index, &mut item)` to every element.
pub fn for_each_indexed<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        items.par_iter_mut().enumerate().for_each(|(i, x)| f(i, x));
        return;
    }
    items.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Apply `f(chunk_index, chunk)` to consecutive chunks of `chunk_len` elements.
pub fn for_each_chunk<T, F>(items: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if is_parallel() {
        use rayon::prelude::*;
        items
            .par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    items
        .chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Block length of [`sum_range`].
const SUM_BLOCK: usize = 4096;

/// Sum of `f(i)` over `0..len`. Fixed blocks are summed in index order and the
/// block sums added in order, so the result does not depend on the policy or
/// the thread count.
pub fn sum_range<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = len.div_ceil(SUM_BLOCK);
    let block_sum = |b: usize| (b * SUM_BLOCK..((b + 1) * SUM_BLOCK).min(len)).map(&f).sum::<f64>();
    map_range(blocks, block_sum).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_order() {
        let v = map_range(100, |i| i * i);
        assert_eq!(v[7], 49);
        assert_eq!(v.len(), 100);
    }

    #[test]
    fn chunks_cover_everything() {
        let mut v = vec![0usize; 10];
        for_each_chunk(&mut v, 3, |ci, c| c.iter_mut().for_each(|x| *x = ci));
        assert_eq!(v, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3]);
    }

    #[test]
    fn sum_is_policy_independent() {
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        set_parallel(false);
        let a = sum_range(100_000, f);
        set_parallel(true);
        let b = sum_range(100_000, f);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(sum_range(0, f), 0.0);
    }
}
