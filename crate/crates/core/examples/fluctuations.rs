//! H^{1/2} norms, sample fluctuations, and the terms of the Laplace-transform expansion.

use loggas::equilibrium::{solve_equilibrium, Method, Potential};
use loggas::fluctuations::{h_half_norm_squared, FluctEvaluator, LaplaceConvention, LaplaceExpansion, TestFunction};
use loggas::numerics::stats;
use loggas::sampler::{sample_replicas, SamplerSpec};
use loggas::transport::solve_transport;

fn main() -> loggas::Result<()> {
    let v = Potential::quadratic();
    let eq = solve_equilibrium(&v, 512, Method::AnalyticOneCut)?;
    let xi = TestFunction::bump(0.0, 0.5);
    let norm = h_half_norm_squared(&xi)?;

    let (n, beta) = (256, 2.0);
    let eval = FluctEvaluator::new(xi.clone(), &eq);
    let reps = sample_replicas(&SamplerSpec::Tridiagonal { n, beta, seed: 11 }, 400, 1)?;
    let f: Vec<f64> = reps.iter().map(|c| eval.eval(c.points())).collect();
    println!("Var Fluct = {:.4}, (2/beta)||xi||^2 = {:.4}", stats::variance(&f), 2.0 / beta * norm);

    let map = solve_transport(&xi, &eq, &v)?;
    let exp = LaplaceExpansion::new(&map, &eq, beta, n, 1.0, LaplaceConvention::Corrected)?;
    let terms = exp.terms(reps[0].points());
    println!("s = 1: Main1 = {:.3e}, Error1 = {:.3e}, Error2 = {:.3e}, Error3 = {:.3e}", terms.main1, terms.error1, terms.error2, terms.error3);
    Ok(())
}
