use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::distances::{truncation_mass, validate_points};
use super::Background;
use crate::equilibrium::{EquilibriumMeasure, Potential};
use crate::error::{Error, Result};
use crate::sampler::hamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyForm {
    /// `1/2 (pair_sum + cross_term + background_term)`.
    Sum,
    /// `(field_integral + tail_correction - 2 pi self_energy_sum) / 4 pi - f_correction`.
    Field,
}

/// Parts of a next-order or local energy; `total` is recomputable from the parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub form: EnergyForm,
    pub pair_sum: f64,
    pub cross_term: f64,
    pub background_term: f64,
    pub field_integral: f64,
    /// `sum_i g(eta_i)`.
    pub self_energy_sum: f64,
    pub f_correction: f64,
    pub tail_correction: f64,
    /// Estimated absolute error of `total`.
    pub tolerance: f64,
    /// Number of charges counted in the self-energy.
    pub count: usize,
    pub total: f64,
}

impl EnergyBreakdown {
    pub(crate) fn sum_form(pair_sum: f64, cross_term: f64, background_term: f64, count: usize, tolerance: f64) -> Self {
        let mut e = EnergyBreakdown {
            form: EnergyForm::Sum,
            pair_sum,
            cross_term,
            background_term,
            field_integral: 0.0,
            self_energy_sum: 0.0,
            f_correction: 0.0,
            tail_correction: 0.0,
            tolerance,
            count,
            total: 0.0,
        };
        e.total = e.recombine();
        e
    }

    pub(crate) fn field_form(
        field_integral: f64,
        tail_correction: f64,
        self_energy_sum: f64,
        f_correction: f64,
        count: usize,
        tolerance: f64,
    ) -> Self {
        let mut e = EnergyBreakdown {
            form: EnergyForm::Field,
            pair_sum: 0.0,
            cross_term: 0.0,
            background_term: 0.0,
            field_integral,
            self_energy_sum,
            f_correction,
            tail_correction,
            tolerance,
            count,
            total: 0.0,
        };
        e.total = e.recombine();
        e
    }

    pub fn recombine(&self) -> f64 {
        match self.form {
            EnergyForm::Sum => 0.5 * (self.pair_sum + self.cross_term + self.background_term),
            EnergyForm::Field => {
                (self.field_integral + self.tail_correction - 2.0 * PI * self.self_energy_sum) / (4.0 * PI)
                    - self.f_correction
            }
        }
    }

    /// Field energy with the renormalizing self-energy removed (monotone in the truncation).
    pub fn renormalized_field(&self) -> f64 {
        self.field_integral + self.tail_correction - 2.0 * PI * self.self_energy_sum - 4.0 * PI * self.f_correction
    }
}

pub(crate) fn check_mass(points: &[f64], bg: &dyn Background) -> Result<()> {
    let n = points.len() as f64;
    let m = bg.mass();
    if (m - n).abs() > 1e-6 * n.max(1.0) {
        return Err(Error::MassMismatch { expected: n, got: m });
    }
    Ok(())
}

/// `F(X, mu) = 1/2 iint_{x != y} -log|x - y| d(sum delta - mu)^2` for a background of mass `N`.
pub fn next_order_energy(points: &[f64], bg: &dyn Background) -> Result<EnergyBreakdown> {
    validate_points(points)?;
    check_mass(points, bg)?;
    let n = points.len();
    let mut pair = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pair -= 2.0 * (points[j] - points[i]).ln();
        }
    }
    let cross = -2.0 * points.iter().map(|&x| bg.log_potential(x)).sum::<f64>();
    let back = bg.log_energy();
    let tol = 1e-12 * (pair.abs() + cross.abs() + back.abs());
    Ok(EnergyBreakdown::sum_form(pair, cross, back, n, tol))
}

/// `F_N(X_N, mu_V) = F(N X_N, mu_V') - N log N / 2` for macroscopic points.
pub fn macroscopic_next_order_energy(points: &[f64], eq: &EquilibriumMeasure) -> Result<f64> {
    let n = points.len();
    let bg = eq.blow_up(n.max(1));
    let blown: Vec<f64> = points.iter().map(|x| n as f64 * x).collect();
    let f = next_order_energy(&blown, &bg)?;
    Ok(f.total - 0.5 * n as f64 * (n as f64).ln())
}

/// `H_N(X) - [N^2 I_V(mu_V) + N sum zeta_V(x_i) + F_N(X, mu_V)]`; zero up to quadrature.
pub fn splitting_check(points: &[f64], potential: &Potential, eq: &EquilibriumMeasure) -> Result<f64> {
    let n = points.len() as f64;
    let h = hamiltonian(points, potential)?;
    let zeta: f64 = points.iter().map(|&x| eq.effective_potential(potential, x)).sum();
    let f = macroscopic_next_order_energy(points, eq)?;
    Ok(h - (n * n * eq.energy(potential) + n * zeta + f))
}

/// `sum_i int f_{eta_i}(x - x_i) dmu(x)` over the selected indices.
pub(crate) fn f_correction(points: &[f64], eta: &[f64], bg: &dyn Background, idx: impl Iterator<Item = usize>) -> f64 {
    idx.map(|i| truncation_mass(bg, points[i], eta[i])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::Uniform;
    use crate::equilibrium::{solve_equilibrium, Method};
    use crate::sampler::sample_tridiagonal;

    #[test]
    fn two_points_on_lebesgue() {
        let bg = Uniform { a: 0.0, b: 2.0, height: 1.0 };
        let e = next_order_energy(&[0.5, 1.5], &bg).unwrap();
        // h(1/2) = h(3/2) = 2 + 0.5 log 2 - 1.5 log 1.5 = 1.73831...
        let h = 2.0 + 0.5 * 2f64.ln() - 1.5 * 1.5f64.ln();
        let want = 0.5 * (0.0 - 4.0 * h + (6.0 - 4.0 * 2f64.ln()));
        assert!((h - 1.73831).abs() < 1e-4);
        assert!((e.total - want).abs() < 1e-12, "{} {want}", e.total);
        assert!((e.total + 1.8630).abs() < 1e-4);
        assert_eq!(e.total, e.recombine());
    }

    #[test]
    fn translation_invariance() {
        let eq = solve_equilibrium(&Potential::quadratic(), 512, Method::AnalyticOneCut).unwrap();
        let c = sample_tridiagonal(50, 2.0, 4).unwrap();
        let bg = eq.blow_up(50);
        let pts = c.blown_up();
        let e0 = next_order_energy(&pts, &bg).unwrap().total;
        let moved: Vec<f64> = pts.iter().map(|x| x + 3.7).collect();
        let e1 = next_order_energy(&moved, &bg.translated(3.7)).unwrap().total;
        assert!((e0 - e1).abs() < 1e-10, "{e0} {e1}");
    }

    #[test]
    fn mass_mismatch() {
        let bg = Uniform { a: 0.0, b: 2.0, height: 0.5 };
        assert!(matches!(next_order_energy(&[0.5, 1.5], &bg), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn splitting_formula_closes() {
        let v = Potential::quadratic();
        let eq = solve_equilibrium(&v, 512, Method::AnalyticOneCut).unwrap();
        for (k, n) in [(0u64, 1usize), (1, 7), (2, 64), (3, 200)] {
            let c = sample_tridiagonal(n, 2.0, k).unwrap();
            let r = splitting_check(c.points(), &v, &eq).unwrap();
            assert!(r.abs() < 1e-6 * (n * n) as f64, "n={n}: {r}");
        }
    }
}
