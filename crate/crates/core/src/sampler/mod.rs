//! Gibbs-measure samplers: the tridiagonal beta-Hermite model for quadratic `V` and
//! single-site Metropolis for general `V`, plus a deterministic replica pool.

mod config;
mod density;
mod mcmc;
mod replicas;
mod tridiagonal;

pub use config::{Configuration, Provenance};
pub use density::{hamiltonian, log_density_unnormalized};
pub use mcmc::{sample_mcmc, sample_mcmc_chain, sample_mcmc_with, McmcParams};
pub use replicas::{run_pool, sample_replicas, SamplerSpec};
pub use tridiagonal::sample_tridiagonal;
