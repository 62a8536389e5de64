//! Transport maps of a polynomial and of bumps at shrinking scales.

use loggas::equilibrium::{solve_equilibrium, Method, Potential};
use loggas::fluctuations::TestFunction;
use loggas::transport::{decay_profile, solve_transport};

fn main() -> loggas::Result<()> {
    let v = Potential::quadratic();
    let eq = solve_equilibrium(&v, 512, Method::AnalyticOneCut)?;

    let map = solve_transport(&TestFunction::Polynomial { coefficients: vec![0.0, 0.0, 1.0] }, &eq, &v)?;
    println!("xi = x^2: psi(0.3) = {:.6} (want -0.15), c_xi = {:.6}", map.psi(0.3), map.c_xi);

    for l in [0.1, 0.05] {
        let map = solve_transport(&TestFunction::bump(0.0, l), &eq, &v)?;
        let decay = decay_profile(&map, &eq, 0)?;
        println!(
            "bump L = {l}: residual {:.1e}, sup|psi'| = {:.3}, int psi' dmu = {:.5}, far-field decay |x|^-{:.2}",
            map.residual,
            map.psi_prime_sup,
            map.mean_shift_integral(&eq),
            decay.exponent
        );
    }
    Ok(())
}
