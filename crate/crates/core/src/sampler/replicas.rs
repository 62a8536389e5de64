use rayon::prelude::*;
use std::sync::Arc;

use super::{sample_mcmc_with, sample_tridiagonal, Configuration, McmcParams};
use crate::equilibrium::{EquilibriumMeasure, Potential};
use crate::error::{Error, Result};
use crate::numerics::rng::derive_seed;

/// What to sample for each replica.
#[derive(Clone)]
pub enum SamplerSpec {
    Tridiagonal { n: usize, beta: f64, seed: u64 },
    Mcmc { potential: Potential, eq: Arc<EquilibriumMeasure>, n: usize, beta: f64, seed: u64, params: McmcParams },
}

impl SamplerSpec {
    fn seed(&self) -> u64 {
        match self {
            SamplerSpec::Tridiagonal { seed, .. } | SamplerSpec::Mcmc { seed, .. } => *seed,
        }
    }

    /// Replica `k`, independent of how replicas are scheduled.
    pub fn sample(&self, k: usize) -> Result<Configuration> {
        let s = derive_seed(self.seed(), k as u64);
        match self {
            SamplerSpec::Tridiagonal { n, beta, .. } => sample_tridiagonal(*n, *beta, s),
            SamplerSpec::Mcmc { potential, eq, n, beta, params, .. } => sample_mcmc_with(potential, eq, *n, *beta, s, params),
        }
    }
}

/// Runs `f` on `0..count` in a pool of `workers` threads; results are in index order.
pub fn run_pool<T, F>(count: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// `count` replicas; replica `k` uses seed `derive_seed(seed, k)`, so output does not depend on `workers`.
pub fn sample_replicas(spec: &SamplerSpec, count: usize, workers: usize) -> Result<Vec<Configuration>> {
    if count == 0 {
        return Err(Error::invalid("replicas", "need at least one replica"));
    }
    run_pool(count, workers, |k| spec.sample(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_count_does_not_change_output() {
        let spec = SamplerSpec::Tridiagonal { n: 40, beta: 2.0, seed: 99 };
        let a = sample_replicas(&spec, 8, 1).unwrap();
        let b = sample_replicas(&spec, 8, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0].points(), a[1].points());
    }

    #[test]
    fn zero_replicas_is_an_argument_error() {
        let spec = SamplerSpec::Tridiagonal { n: 4, beta: 2.0, seed: 1 };
        assert!(sample_replicas(&spec, 0, 1).unwrap_err().is_validation());
    }
}
