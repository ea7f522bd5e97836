use rayon::prelude::*;
use rayon::ThreadPoolBuilder;

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV: &str = "NHKNOT_WORKERS";

/// Worker count from [`WORKERS_ENV`], falling back to the number of CPUs.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on a pool of `workers` threads.
///
/// Results are returned in input order, so the output does not depend on the
/// number of workers or on scheduling. Dense kernels are forced sequential so
/// each item is computed with the same floating-point operation order.
pub fn map_indexed<T, R, F>(workers: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    faer::set_global_parallelism(faer::Par::Seq);
    let workers = workers.max(1);
    if workers == 1 {
        return items.iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let pool = ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    pool.install(|| items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect())
}
