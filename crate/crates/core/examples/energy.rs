//! Next-order energy of a sample, its splitting-formula residual, and a local window energy.

use std::sync::Arc;

use loggas::electrostatics::{local_energy_fast, next_order_energy, splitting_check, Scaled, Window};
use loggas::equilibrium::{solve_equilibrium, Method, Potential};
use loggas::sampler::sample_tridiagonal;

fn main() -> loggas::Result<()> {
    let v = Potential::quadratic();
    let eq = Arc::new(solve_equilibrium(&v, 512, Method::AnalyticOneCut)?);
    let n = 256;
    let c = sample_tridiagonal(n, 2.0, 3)?;
    let bg = Scaled::new(eq.clone(), n as f64);
    let pts = c.blown_up();

    let f = next_order_energy(&pts, &bg)?;
    println!("F(X, mu) / N = {:.5}", f.total / n as f64);
    println!("splitting residual = {:.2e}", splitting_check(c.points(), &v, &eq)?);
    for len in [16.0, 64.0] {
        let e = local_energy_fast(&pts, &bg, &Window::centered(0.0, len))?;
        println!("window {len}: F^Omega = {:.4}, {} points, field integral {:.4}", e.total, e.count, e.field_integral);
    }
    Ok(())
}
