//! Data-parallel map with a sequential fallback.
//!
//! Sweep rows, sampling evidence, and consistency suites are embarrassingly
//! parallel; everything they touch is immutable. The `parallel` feature
//! (default) routes them through rayon, otherwise a plain iterator runs the
//! same closures. Output order is the input order either way, so results are
//! byte-identical across both builds.

/// Map `f` over `items`, preserving order.
pub fn map_vec<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential variant kept callable from benches regardless of features.
pub fn map_vec_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Run `f` inside a worker pool capped at `jobs` threads (when the parallel
/// feature is active and jobs > 0); otherwise run it as-is.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Some(n) = jobs {
        if n > 0 {
            return rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("worker pool")
                .install(f);
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    f()
}
