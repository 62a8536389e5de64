use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::{cheb, linalg::Toeplitz, quad};

/// One support interval `[a, b]` carrying the density
/// `mu(x) dx = sqrt(1 - v^2) sum_n b_n U_{n-1}(v) dv`, `x = c + r v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
    /// `coeffs[k]` multiplies `U_k`.
    pub coeffs: Vec<f64>,
}

impl Interval {
    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.center()) / self.radius()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn mass(&self) -> f64 {
        0.5 * PI * self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// Smooth factor `p(v) = sum b_n U_{n-1}(v)`.
    pub fn p(&self, v: f64) -> f64 {
        cheb::eval_u(&self.coeffs, v)
    }

    pub fn density(&self, x: f64) -> f64 {
        if !self.contains(x) {
            return 0.0;
        }
        let v = self.to_unit(x);
        (1.0 - v * v).max(0.0).sqrt() * self.p(v) / self.radius()
    }

    /// `int -log|x - y| dmu_i(y)`.
    pub fn log_potential(&self, x: f64) -> f64 {
        -self.mass() * self.radius().ln() - cheb::log_integral(&self.coeffs, self.to_unit(x))
    }

    /// `int -log|z - y| dmu_i(y)` at a point `z` of the plane.
    pub fn log_potential_at(&self, z: Complex64) -> f64 {
        let u = (z - self.center()) / self.radius();
        -self.mass() * self.radius().ln() - cheb::log_integral_complex(&self.coeffs, u)
    }

    /// `int dmu_i(y) / (z - y)`, upper limit on the cut.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        let u = (z - self.center()) / self.radius();
        cheb::power_sum(&self.coeffs, cheb::joukowski_inv(u)) * (PI / self.radius())
    }

    /// Mass of `[a, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return self.mass();
        }
        let th = self.to_unit(x).clamp(-1.0, 1.0).acos();
        let g = |k: usize| if k == 0 { PI - th } else { -(k as f64 * th).sin() / k as f64 };
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, bn)| {
                let n = i + 1;
                0.5 * bn * (g(n - 1) - g(n + 1))
            })
            .sum()
    }

    /// Midpoint rule in the angle variable: spectrally accurate for smooth integrands.
    pub fn nodes(&self, m: usize) -> Vec<(f64, f64)> {
        (0..m)
            .map(|k| {
                let th = PI * (k as f64 + 0.5) / m as f64;
                let s: f64 = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, bn)| bn * ((i + 1) as f64 * th).sin())
                    .sum();
                (self.center() + self.radius() * th.cos(), PI / m as f64 * s * th.sin())
            })
            .collect()
    }
}

/// Piecewise-constant density on a uniform grid of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub lo: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl GridDensity {
    pub fn hi(&self) -> f64 {
        self.lo + self.dx * self.values.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.lo + (j as f64 + 0.5) * self.dx).collect()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx
    }

    pub fn check_probability(&self, tol: f64) -> Result<()> {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let mass = self.mass();
        if (mass - 1.0).abs() > tol || min < 0.0 || !mass.is_finite() {
            return Err(Error::NotAProbability { mass, min });
        }
        Ok(())
    }
}

/// `int int -log|x - y|` over a pair of cells of width `dx` whose left ends differ by `m dx`.
pub fn cell_log_kernel(m: usize, dx: f64) -> f64 {
    let phi = |t: f64| if t == 0.0 { 0.0 } else { 0.5 * t * t * t.abs().ln() - 0.75 * t * t };
    let m = m as f64;
    -dx * dx * (phi(m + 1.0) - 2.0 * phi(m) + phi(m - 1.0) + dx.ln())
}

/// Cell integrals of `V`.
pub fn cell_potential(grid: &GridDensity, v: &Potential) -> Vec<f64> {
    (0..grid.values.len())
        .map(|j| {
            let a = grid.lo + j as f64 * grid.dx;
            quad::gauss(|x| v.value(x), a, a + grid.dx, 4)
        })
        .collect()
}

/// Continuous energy `I_V(mu) = 1/2 int int -log|x-y| dmu dmu + int V dmu` of a grid density,
/// with the log kernel integrated exactly cell by cell.
pub fn energy_functional(density: &GridDensity, potential: &Potential) -> Result<f64> {
    density.check_probability(1e-6)?;
    let n = density.values.len();
    let col: Vec<f64> = (0..n).map(|m| cell_log_kernel(m, density.dx)).collect();
    let t = Toeplitz::new(&col);
    let ar = t.apply(&density.values);
    let quad_part: f64 = density.values.iter().zip(&ar).map(|(r, a)| r * a).sum();
    let vc = cell_potential(density, potential);
    let lin: f64 = density.values.iter().zip(&vc).map(|(r, v)| r * v).sum();
    Ok(0.5 * quad_part + lin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AnalyticOneCut,
    DiscretizedMinimization,
    UserSupplied,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AnalyticOneCut => "analytic-one-cut",
            Method::DiscretizedMinimization => "discretized-minimization",
            Method::UserSupplied => "user-supplied",
        }
    }
}

/// Achieved accuracy of a solved measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub mass_error: f64,
    pub min_density: f64,
    pub el_residual_bulk: f64,
    pub min_zeta_off_support: f64,
}

/// Equilibrium measure `mu_V = S sigma` with its Robin constant and a grid representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumMeasure {
    pub label: String,
    pub method: Method,
    pub grid_size: usize,
    pub intervals: Vec<Interval>,
    pub c_v: f64,
    pub bulk_margin: f64,
    /// `int int -log|x - y| dmu_V dmu_V`.
    pub log_energy: f64,
    pub grid: GridDensity,
    pub tolerances: Tolerances,
}

impl EquilibriumMeasure {
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|i| (i.a, i.b)).collect()
    }

    pub fn hull(&self) -> (f64, f64) {
        let a = self.intervals.first().map_or(0.0, |i| i.a);
        let b = self.intervals.last().map_or(0.0, |i| i.b);
        (a, b)
    }

    /// Working box `U`: the support hull dilated by 1.5 about its center.
    pub fn working_box(&self) -> (f64, f64) {
        let (a, b) = self.hull();
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        (c - 1.5 * r, c + 1.5 * r)
    }

    pub fn in_support(&self, x: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    /// Bulk `{x in support : dist(x, edges) >= d}` as intervals.
    pub fn bulk(&self) -> Vec<(f64, f64)> {
        let d = self.bulk_margin;
        self.intervals
            .iter()
            .filter(|i| i.b - i.a > 2.0 * d)
            .map(|i| (i.a + d, i.b - d))
            .collect()
    }

    pub fn in_bulk(&self, x: f64) -> bool {
        self.bulk().iter().any(|(a, b)| x >= *a && x <= *b)
    }

    pub fn density(&self, x: f64) -> f64 {
        self.intervals.iter().map(|i| i.density(x)).sum()
    }

    /// `sigma(x) = prod_i sqrt(|x - a_i| |x - b_i|)`.
    pub fn sigma(&self, x: f64) -> f64 {
        self.intervals.iter().map(|i| ((x - i.a).abs() * (x - i.b).abs()).sqrt()).product()
    }

    /// Smooth factor `S` with `mu_V = S sigma`, continued past the edges by its series.
    pub fn s_factor(&self, x: f64) -> f64 {
        let k = self.nearest_interval(x);
        let iv = &self.intervals[k];
        let others: f64 = self
            .intervals
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, i)| ((x - i.a).abs() * (x - i.b).abs()).sqrt())
            .product();
        iv.p(iv.to_unit(x)) / (iv.radius() * iv.radius() * others)
    }

    pub fn nearest_interval(&self, x: f64) -> usize {
        let dist = |i: &Interval| if i.contains(x) { 0.0 } else { (x - i.a).abs().min((x - i.b).abs()) };
        (0..self.intervals.len())
            .min_by(|&p, &q| dist(&self.intervals[p]).total_cmp(&dist(&self.intervals[q])))
            .unwrap_or(0)
    }

    pub fn mass(&self) -> f64 {
        self.intervals.iter().map(Interval::mass).sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.intervals.iter().map(|i| i.cdf(x)).sum()
    }

    /// Inverse of the distribution function by bisection.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = self.hull();
        let target = p.clamp(0.0, 1.0) * self.mass();
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Logarithmic potential `h(x) = int -log|x - y| dmu_V(y)`.
    pub fn log_potential(&self, x: f64) -> f64 {
        self.intervals.iter().map(|i| i.log_potential(x)).sum()
    }

    /// Planar extension `h(z) = int -log|z - y| dmu_V(y)`.
    pub fn log_potential_at(&self, z: Complex64) -> f64 {
        self.intervals.iter().map(|i| i.log_potential_at(z)).sum()
    }

    /// `int dmu_V(y) / (z - y)`; on the support the upper-half-plane limit.
    pub fn stieltjes(&self, z: Complex64) -> Complex64 {
        self.intervals.iter().map(|i| i.stieltjes(z)).sum()
    }

    /// `h'(x) = -PV int dmu_V(y) / (x - y)`.
    pub fn log_potential_derivative(&self, x: f64) -> f64 {
        -self.stieltjes(Complex64::new(x, 0.0)).re
    }

    /// Effective potential `zeta_V = h + V - c_V`.
    pub fn effective_potential(&self, potential: &Potential, x: f64) -> f64 {
        self.log_potential(x) + potential.value(x) - self.c_v
    }

    /// Quadrature nodes and weights of `mu_V` (`m` per interval) for smooth integrands.
    pub fn nodes(&self, m: usize) -> Vec<(f64, f64)> {
        self.intervals.iter().flat_map(|i| i.nodes(m)).collect()
    }

    /// `int f dmu_V` by adaptive quadrature in the angle variable, splitting at `breaks`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64], tol: f64) -> f64 {
        let mut total = 0.0;
        for iv in &self.intervals {
            let mut th: Vec<f64> = vec![0.0, PI];
            for &x in breaks {
                if x > iv.a && x < iv.b {
                    th.push(iv.to_unit(x).acos());
                }
            }
            th.sort_by(|a, b| a.total_cmp(b));
            th.dedup();
            let (c, r) = (iv.center(), iv.radius());
            let g = |t: f64| {
                let s: f64 = iv
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, bn)| bn * ((i + 1) as f64 * t).sin())
                    .sum();
                f(c + r * t.cos()) * s * t.sin()
            };
            total += quad::adaptive(g, &th, tol, tol).value;
        }
        total
    }

    /// `I_V(mu_V)`.
    pub fn energy(&self, potential: &Potential) -> f64 {
        0.5 * self.log_energy + self.integrate(|x| potential.value(x), &[], 1e-13)
    }

    /// Blown-up measure `mu'(x) = mu_V(x / n)` of mass `n`.
    pub fn blow_up(&self, n: usize) -> crate::electrostatics::Scaled {
        crate::electrostatics::Scaled::new(std::sync::Arc::new(self.clone()), n as f64)
    }
}
