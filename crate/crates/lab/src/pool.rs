use drinfeld_core::localglobal::PrimeMap;
use drinfeld_core::PrimeIdeal;
use rayon::prelude::*;

/// Runs prime scans on a rayon pool. Results keep the input order, so the
/// number of workers never changes a report.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    /// `None` uses every available core.
    pub fn new(jobs: Option<usize>) -> Self {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = jobs {
            builder = builder.num_threads(n.max(1));
        }
        Pool {
            pool: builder.build().expect("thread pool"),
        }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl PrimeMap for Pool {
    fn map_primes<T, F>(&self, primes: &[PrimeIdeal], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&PrimeIdeal) -> T + Sync + Send,
    {
        self.pool.install(|| primes.par_iter().map(&f).collect())
    }
}
