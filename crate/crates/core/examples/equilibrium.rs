//! Equilibrium measures of a quadratic and a quartic potential.

use loggas::equilibrium::{solve_equilibrium, Method, Potential};

fn main() -> loggas::Result<()> {
    let quad = solve_equilibrium(&Potential::quadratic(), 512, Method::AnalyticOneCut)?;
    println!("x^2: support {:?}, density(0) = {:.6} (2/pi = {:.6})", quad.support(), quad.density(0.0), 2.0 / std::f64::consts::PI);
    println!("     c_V = {:.6}, EL residual on bulk = {:.2e}", quad.c_v, quad.tolerances.el_residual_bulk);

    let quartic = Potential::polynomial("x^4/4 + x^2/2", vec![0.0, 0.0, 0.5, 0.0, 0.25]);
    for method in [Method::AnalyticOneCut, Method::DiscretizedMinimization] {
        let eq = solve_equilibrium(&quartic, 512, method)?;
        println!("{}: support {:?}, density(0) = {:.6}", method.as_str(), eq.support(), eq.density(0.0));
    }
    Ok(())
}
