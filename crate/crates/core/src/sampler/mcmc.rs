use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Configuration, Provenance};
use crate::equilibrium::{solve_equilibrium, EquilibriumMeasure, Method, Potential};
use crate::error::{Error, Result};
use crate::numerics::rng;

/// Metropolis schedule. `proposal_sigma` is in macroscopic units and is adapted during burn-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcParams {
    pub sweeps: usize,
    pub burn_in: usize,
    pub proposal_sigma: f64,
    pub target_acceptance: f64,
}

impl McmcParams {
    /// Burn-in of `100 n` sweeps, sampling for as many again.
    pub fn for_n(n: usize) -> Self {
        McmcParams { sweeps: 200 * n, burn_in: 100 * n, proposal_sigma: 1.0 / n.max(1) as f64, target_acceptance: 0.35 }
    }

    fn validate(&self) -> Result<()> {
        if self.sweeps < 1 {
            return Err(Error::invalid("sweeps", "need at least one sweep"));
        }
        if self.sweeps < self.burn_in {
            return Err(Error::NotBurnedIn { sweeps: self.sweeps, burn_in: self.burn_in });
        }
        if !(self.proposal_sigma > 0.0) {
            return Err(Error::invalid("proposal_sigma", "must be positive"));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::invalid("target_acceptance", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

struct Chain<'a> {
    x: Vec<f64>,
    v: &'a Potential,
    n: f64,
    beta: f64,
    sigma: f64,
    rng: ChaCha8Rng,
    accepted: u64,
    proposed: u64,
}

impl Chain<'_> {
    /// One sweep of single-site moves, `O(N)` energy update each.
    fn sweep(&mut self) {
        let len = self.x.len();
        for k in 0..len {
            let old = self.x[k];
            let z: f64 = self.rng.sample(StandardNormal);
            let new = old + self.sigma * z;
            let mut d_pair = 0.0;
            let mut clash = false;
            for (j, &y) in self.x.iter().enumerate() {
                if j != k {
                    let dn = (new - y).abs();
                    if dn == 0.0 {
                        clash = true;
                        break;
                    }
                    d_pair -= (dn / (old - y).abs()).ln();
                }
            }
            self.proposed += 1;
            if clash {
                continue;
            }
            let d_h = d_pair + self.n * (self.v.value(new) - self.v.value(old));
            let u: f64 = self.rng.gen();
            if d_h <= 0.0 || u.ln() < -self.beta * d_h {
                self.x[k] = new;
                self.accepted += 1;
            }
        }
    }

    fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn reset_counts(&mut self) {
        self.accepted = 0;
        self.proposed = 0;
    }
}

fn start_chain<'a>(
    v: &'a Potential,
    eq: &EquilibriumMeasure,
    n: usize,
    beta: f64,
    seed: u64,
    params: &McmcParams,
) -> Result<Chain<'a>> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta { beta });
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one point"));
    }
    params.validate()?;
    let mut r = rng::stream(seed, 1);
    // independent draws from mu_V by inverse-CDF
    let x: Vec<f64> = (0..n).map(|_| eq.quantile(r.gen::<f64>())).collect();
    let mut chain = Chain { x, v, n: n as f64, beta, sigma: params.proposal_sigma, rng: r, accepted: 0, proposed: 0 };
    // burn-in with Robbins-Monro adaptation of the proposal scale
    let block = 10usize;
    let mut done = 0;
    let mut k = 1.0f64;
    while done < params.burn_in {
        let m = block.min(params.burn_in - done);
        chain.reset_counts();
        for _ in 0..m {
            chain.sweep();
        }
        done += m;
        let gain = 1.0 / k.sqrt();
        chain.sigma *= (gain * (chain.rate() - params.target_acceptance)).exp();
        k += 1.0;
    }
    chain.reset_counts();
    Ok(chain)
}

fn finish(chain: &Chain, beta: f64, seed: u64, sweeps: usize) -> Result<Configuration> {
    let prov = Provenance { sampler: "mcmc".into(), seed, steps: sweeps, acceptance_rate: Some(chain.rate()) };
    Configuration::new(chain.x.clone(), beta, prov)
}

/// Single-site Metropolis chain targeting `exp(-beta H_N)`, started from `mu_V` quantile draws.
/// Returns the state after `params.sweeps` sweeps.
pub fn sample_mcmc(potential: &Potential, n: usize, beta: f64, seed: u64, params: &McmcParams) -> Result<Configuration> {
    let eq = equilibrium_for(potential)?;
    sample_mcmc_with(potential, &eq, n, beta, seed, params)
}

/// As [`sample_mcmc`] with a precomputed equilibrium measure.
pub fn sample_mcmc_with(
    potential: &Potential,
    eq: &EquilibriumMeasure,
    n: usize,
    beta: f64,
    seed: u64,
    params: &McmcParams,
) -> Result<Configuration> {
    let mut chain = start_chain(potential, eq, n, beta, seed, params)?;
    for _ in params.burn_in..params.sweeps {
        chain.sweep();
    }
    finish(&chain, beta, seed, params.sweeps)
}

/// One chain recorded every `thin` sweeps after burn-in, `count` states in total.
pub fn sample_mcmc_chain(
    potential: &Potential,
    eq: &EquilibriumMeasure,
    n: usize,
    beta: f64,
    seed: u64,
    params: &McmcParams,
    thin: usize,
    count: usize,
) -> Result<Vec<Configuration>> {
    let mut chain = start_chain(potential, eq, n, beta, seed, params)?;
    let thin = thin.max(1);
    let mut out = Vec::with_capacity(count);
    let mut sweeps = params.burn_in;
    for _ in 0..count {
        for _ in 0..thin {
            chain.sweep();
        }
        sweeps += thin;
        out.push(finish(&chain, beta, seed, sweeps)?);
    }
    Ok(out)
}

pub(crate) fn equilibrium_for(potential: &Potential) -> Result<EquilibriumMeasure> {
    match solve_equilibrium(potential, 1024, Method::AnalyticOneCut) {
        Err(Error::MultiCutDetected { .. }) => solve_equilibrium(potential, 2048, Method::DiscretizedMinimization),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{quad, stats};

    #[test]
    fn adaptation_hits_acceptance_band() {
        let v = Potential::quadratic();
        let c = sample_mcmc(&v, 32, 2.0, 3, &McmcParams::for_n(32)).unwrap();
        let a = c.provenance.acceptance_rate.unwrap();
        assert!((0.2..=0.5).contains(&a), "{a}");
    }

    #[test]
    fn parameter_errors() {
        let v = Potential::quadratic();
        let p = McmcParams { sweeps: 5, burn_in: 10, ..McmcParams::for_n(4) };
        assert!(matches!(sample_mcmc(&v, 4, 2.0, 1, &p), Err(Error::NotBurnedIn { .. })));
        assert!(matches!(sample_mcmc(&v, 4, -1.0, 1, &McmcParams::for_n(4)), Err(Error::InvalidBeta { .. })));
    }

    #[test]
    fn two_point_gap_matches_quadrature() {
        let v = Potential::quadratic();
        let eq = equilibrium_for(&v).unwrap();
        let params = McmcParams { sweeps: 2000, burn_in: 2000, proposal_sigma: 0.5, target_acceptance: 0.35 };
        let chain = sample_mcmc_chain(&v, &eq, 2, 2.0, 17, &params, 5, 10_000).unwrap();
        let gaps: Vec<f64> = chain.iter().map(|c| c.points()[1] - c.points()[0]).collect();
        // oracle: Gibbs weight integrated over the centre of mass and the gap in [0, t] by 2D quadrature
        let w = |c: f64, g: f64| {
            let pts = [0.5 * (c - g), 0.5 * (c + g)];
            (-2.0 * crate::sampler::hamiltonian(&pts, &v).unwrap()).exp()
        };
        let mass = |t: f64| {
            let inner = |g: f64| if g <= 0.0 { 0.0 } else { quad::gauss_panels(|c| w(c, g), &[-4.0, -1.0, 0.0, 1.0, 4.0], 20) };
            quad::adaptive(inner, &[0.0, t], 1e-12, 1e-10).value
        };
        let z = mass(5.0);
        let ks = stats::ks_one_sample(&gaps, |t| mass(t.clamp(0.0, 5.0)) / z);
        assert!(ks.p_value > 0.01, "{ks:?}");
    }
}
