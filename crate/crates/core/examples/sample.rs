//! Tridiagonal and Metropolis samples of the quadratic gas, compared through one linear statistic.

use loggas::equilibrium::Potential;
use loggas::numerics::stats;
use loggas::sampler::{sample_mcmc, sample_replicas, McmcParams, SamplerSpec};

fn main() -> loggas::Result<()> {
    let (n, beta) = (64, 2.0);
    let reps = sample_replicas(&SamplerSpec::Tridiagonal { n, beta, seed: 7 }, 200, 1)?;
    let second: Vec<f64> = reps.iter().map(|c| c.points().iter().map(|x| x * x).sum::<f64>()).collect();
    println!("tridiagonal: E sum x^2 = {:.3} over {} replicas (N/4 = {})", stats::mean(&second), reps.len(), n as f64 / 4.0);

    let c = sample_mcmc(&Potential::quadratic(), n, beta, 7, &McmcParams::for_n(n))?;
    let s: f64 = c.points().iter().map(|x| x * x).sum();
    println!("one Metropolis chain: sum x^2 = {s:.3}, extreme points {:.3} {:.3}", c.points()[0], c.points()[n - 1]);
    Ok(())
}
