use adoptlab_core::basins::Executor;
use rayon::prelude::*;

/// Runs basin cells on the rayon thread pool. Results come back in index
/// order, so output does not depend on the number of workers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl Executor for Parallel {
    fn run<T, F>(&self, count: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(job).collect()
    }
}
