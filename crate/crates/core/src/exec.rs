//! Execution helpers shared by the data-parallel kernels.
//!
//! Every parallel loop in the crate goes through these functions. The
//! contract is strict determinism: the output must be bit-identical for any
//! number of worker threads, and identical to the sequential fallback built
//! without the `parallel` feature. This is achieved by mapping over items
//! (or fixed-size chunks) independently and combining partial results in
//! index order on the calling thread.

/// Chunk length used for chunked reductions. Fixed so the partial sums do
/// not depend on the thread count.
pub const REDUCTION_CHUNK: usize = 1024;

/// Caps the global worker pool. Call once, before any parallel work; later
/// calls and the sequential build are no-ops. Results are unaffected either
/// way.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}

#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n` and collects the results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Sums `f(i)` for `i in 0..n` deterministically: partial sums are taken
/// over fixed chunks of `REDUCTION_CHUNK` indices and added in chunk order.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if n == 0 {
        return 0.0;
    }
    let n_chunks = n.div_ceil(REDUCTION_CHUNK);
    let partials = map_indexed(n_chunks, |c| {
        let lo = c * REDUCTION_CHUNK;
        let hi = (lo + REDUCTION_CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partials.iter().sum()
}

/// Accumulates per-item contributions into a shared histogram.
///
/// Each fixed chunk of items produces a private histogram; the partials are
/// merged bin-wise in chunk order, so the result does not depend on the
/// degree of parallelism.
pub fn histogram<T, F>(items: &[T], n_bins: usize, f: F) -> Vec<f64>
where
    T: Sync,
    F: Fn(&T) -> Option<(usize, f64)> + Sync + Send,
{
    let n_chunks = items.len().div_ceil(REDUCTION_CHUNK).max(1);
    let partials = map_indexed(n_chunks, |c| {
        let lo = c * REDUCTION_CHUNK;
        let hi = (lo + REDUCTION_CHUNK).min(items.len());
        let mut bins = vec![0.0; n_bins];
        for item in &items[lo..hi] {
            if let Some((b, w)) = f(item) {
                bins[b] += w;
            }
        }
        bins
    });
    let mut out = vec![0.0; n_bins];
    for part in partials {
        for (o, p) in out.iter_mut().zip(part.iter()) {
            *o += p;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential_reference() {
        let n = 10_000;
        let par = sum_indexed(n, |i| (i as f64).sin());
        let mut seq = 0.0;
        // Same chunking as sum_indexed, purely sequential.
        for c in 0..n.div_ceil(REDUCTION_CHUNK) {
            let lo = c * REDUCTION_CHUNK;
            let hi = (lo + REDUCTION_CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                acc += (i as f64).sin();
            }
            seq += acc;
        }
        assert_eq!(par, seq);
    }

    #[test]
    fn histogram_is_deterministic() {
        let items: Vec<f64> = (0..5000).map(|i| (i as f64 * 0.37) % 10.0).collect();
        let a = histogram(&items, 10, |&x| Some((x as usize, x)));
        let b = histogram(&items, 10, |&x| Some((x as usize, x)));
        assert_eq!(a, b);
        let total: f64 = a.iter().sum();
        let direct: f64 = items.iter().sum();
        assert!((total - direct).abs() < 1e-9 * direct.abs());
    }
}
