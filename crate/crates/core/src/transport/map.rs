use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::equilibrium::{EquilibriumMeasure, Interval, Potential, PotentialSpec};
use crate::error::{Error, Result};
use crate::fluctuations::TestFunction;
use crate::numerics::cheb;

/// Residual tolerance of the inversion, relative to `max(1, sup|xi|)`.
pub const RESIDUAL_TOL: f64 = 1e-4;

/// Solution `psi` of `Xi_V[psi] = xi + c_xi` on a one-cut support.
///
/// Inside the support `psi` is a Chebyshev series in the affine variable; outside it is the
/// closed-form second branch, with a quadratic bridge within `1e-3 r` of each edge.
#[derive(Debug, Clone)]
pub struct TransportMap {
    pub xi: TestFunction,
    pub interval: Interval,
    /// T-coefficients of `xi(c + r v)`.
    pub xi_coeffs: Vec<f64>,
    /// T-coefficients of `psi(c + r v)` and its first four `v`-derivatives.
    derivs: Vec<Vec<f64>>,
    pub c_xi: f64,
    /// `sup |Xi_V[psi] - xi - c_xi|` on the check grid.
    pub residual: f64,
    /// Standard deviation of `Xi_V[psi] - xi` over the bulk grid.
    pub residual_spread: f64,
    /// `sup_U |psi'|`.
    pub psi_prime_sup: f64,
    /// Working neighbourhood `U`.
    pub domain: (f64, f64),
    stieltjes_b: Vec<f64>,
    potential: Potential,
}

/// Serializable snapshot of a map on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportRecord {
    pub key: String,
    pub xi: TestFunction,
    pub grid_inside: Vec<f64>,
    pub values_inside: Vec<f64>,
    pub grid_outside: Vec<f64>,
    pub values_outside: Vec<f64>,
    pub c_xi: f64,
    pub residual: f64,
}

/// Everything needed to rebuild a [`TransportMap`] without solving again; polynomial potentials only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportState {
    pub xi: TestFunction,
    pub interval: Interval,
    pub xi_coeffs: Vec<f64>,
    pub derivs: Vec<Vec<f64>>,
    pub c_xi: f64,
    pub residual: f64,
    pub residual_spread: f64,
    pub psi_prime_sup: f64,
    pub domain: (f64, f64),
    pub stieltjes_b: Vec<f64>,
    pub potential: PotentialSpec,
}

/// `Xi_V[psi](x) = -psi(x) V'(x) + int (psi(x) - psi(y)) / (x - y) dmu_V(y)`, with the
/// removable singularity at `y = x` filled by `psi'(x)`.
pub fn master_operator(
    psi: &dyn Fn(f64) -> f64,
    dpsi: &dyn Fn(f64) -> f64,
    eq: &EquilibriumMeasure,
    potential: &Potential,
    x: f64,
    breaks: &[f64],
) -> f64 {
    let px = psi(x);
    let dx = dpsi(x);
    let q = |y: f64| {
        let d = x - y;
        if d.abs() < 1e-9 {
            dx
        } else {
            (px - psi(y)) / d
        }
    };
    let mut br = breaks.to_vec();
    br.push(x);
    -px * potential.d1(x) + eq.integrate(q, &br, 1e-11)
}

/// Chebyshev coefficients of `f` on [-1, 1], doubling until the tail is negligible; `scale`
/// is the smallest feature size in the unit variable.
fn resolve(f: impl Fn(f64) -> f64, scale: f64) -> Vec<f64> {
    let mut m = ((32.0 / scale).ceil() as usize).clamp(64, 1 << 16).next_power_of_two();
    loop {
        let a = cheb::interpolate(&f, m);
        let big = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let tail = a[m - 8..].iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if tail <= 1e-14 * big.max(1e-300) || m >= 1 << 16 {
            return cheb::chop(a, 1e-15);
        }
        m *= 2;
    }
}

/// Solves `Xi_V[psi] = xi + c_xi` and verifies the residual.
pub fn solve_transport(xi: &TestFunction, eq: &EquilibriumMeasure, potential: &Potential) -> Result<TransportMap> {
    let map = build(xi, eq, potential)?;
    let scale = sup_abs(xi, map.domain).max(1.0);
    if !(map.residual <= RESIDUAL_TOL * scale) {
        return Err(Error::ResidualTooLarge { residual: map.residual, tolerance: RESIDUAL_TOL * scale });
    }
    Ok(map)
}

fn sup_abs(xi: &TestFunction, (lo, hi): (f64, f64)) -> f64 {
    let m = 4000;
    (0..=m).map(|k| xi.value(lo + (hi - lo) * k as f64 / m as f64).abs()).fold(0.0, f64::max)
}

fn build(xi: &TestFunction, eq: &EquilibriumMeasure, potential: &Potential) -> Result<TransportMap> {
    if eq.intervals.len() != 1 {
        return Err(Error::UnsupportedMeasure(format!(
            "transport needs a one-cut measure, got {} intervals",
            eq.intervals.len()
        )));
    }
    let iv = eq.intervals[0].clone();
    let (c, r) = (iv.center(), iv.radius());
    let bmin = (0..=200).map(|k| iv.p(-1.0 + k as f64 / 100.0)).fold(f64::INFINITY, f64::min);
    if !(bmin > 0.0) {
        return Err(Error::UnsupportedMeasure("density vanishes faster than a square root at an edge".into()));
    }
    let a = resolve(|v| xi.value(c + r * v), xi.scale() / r);
    let c_xi = -a[0];
    // psi at first-kind nodes through the sine transform, then its own series
    let mut m = a.len().next_power_of_two().max(64) * 2;
    let psi_coeffs = loop {
        let num = cheb::eval_u_at_nodes(&a[1..], m);
        let vals: Vec<f64> = cheb::nodes(m)
            .into_iter()
            .zip(num)
            .map(|(v, s)| -r * s / (PI * iv.p(v)))
            .collect();
        let coeffs = cheb::coeffs_from_values(&vals);
        let big = coeffs.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let tail = coeffs[m - 8..].iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if tail <= 1e-13 * big.max(1e-300) || m >= 1 << 17 {
            break cheb::chop(coeffs, 1e-15);
        }
        m *= 2;
    };
    let mut derivs = vec![psi_coeffs];
    for k in 0..4 {
        let d = cheb::derivative(&derivs[k]);
        derivs.push(d);
    }
    let mut map = TransportMap {
        xi: xi.clone(),
        interval: iv.clone(),
        xi_coeffs: a,
        derivs,
        c_xi,
        residual: f64::NAN,
        residual_spread: f64::NAN,
        psi_prime_sup: 0.0,
        domain: eq.working_box(),
        stieltjes_b: iv.coeffs.clone(),
        potential: potential.clone(),
    };
    map.psi_prime_sup = map.sup_derivative();
    map.check_residual(eq);
    Ok(map)
}

impl TransportMap {
    fn cr(&self) -> (f64, f64) {
        (self.interval.center(), self.interval.radius())
    }

    fn edge_gap(&self) -> f64 {
        1e-3 * self.interval.radius()
    }

    /// `psi(x)`.
    pub fn psi(&self, x: f64) -> f64 {
        let (c, r) = self.cr();
        let v = (x - c) / r;
        if v.abs() <= 1.0 {
            return cheb::eval_t(&self.derivs[0], v);
        }
        let d = self.edge_gap();
        let (edge, dir) = if v > 1.0 { (self.interval.b, 1.0) } else { (self.interval.a, -1.0) };
        let dist = (x - edge).abs();
        if dist >= d {
            return self.psi_outside(x);
        }
        // quadratic through the edge value and two outside samples
        let p0 = cheb::eval_t(&self.derivs[0], dir);
        let p1 = self.psi_outside(edge + dir * d);
        let p2 = self.psi_outside(edge + dir * 2.0 * d);
        let s = dist / d;
        p0 * (s - 1.0) * (s - 2.0) / 2.0 - p1 * s * (s - 2.0) + p2 * s * (s - 1.0) / 2.0
    }

    /// Second branch `(int psi mu / (x - y) + xi + c_xi) / (St(x) - V'(x))` off the support.
    fn psi_outside(&self, x: f64) -> f64 {
        let (c, r) = self.cr();
        let w = cheb::joukowski_inv(Complex64::new((x - c) / r, 0.0)).re;
        let sum_a = cheb::power_sum(&self.xi_coeffs[1..], Complex64::new(w, 0.0)).re;
        let st = cheb::power_sum(&self.stieltjes_b, Complex64::new(w, 0.0)).re * PI / r;
        (self.xi.value(x) + self.c_xi - sum_a) / (st - self.potential.d1(x))
    }

    /// `psi^{(k)}(x)` for `k <= 4`: spectral inside, central differences outside.
    pub fn psi_derivative(&self, k: usize, x: f64) -> f64 {
        if k == 0 {
            return self.psi(x);
        }
        let (c, r) = self.cr();
        let v = (x - c) / r;
        if v.abs() <= 1.0 {
            return cheb::eval_t(&self.derivs[k.min(4)], v) / r.powi(k as i32);
        }
        let h = 5e-3 * r;
        let f = |j: f64| self.psi(x + j * h);
        match k {
            1 => (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h),
            2 => (-f(-2.0) + 16.0 * f(-1.0) - 30.0 * f(0.0) + 16.0 * f(1.0) - f(2.0)) / (12.0 * h * h),
            3 => (-f(-2.0) + 2.0 * f(-1.0) - 2.0 * f(1.0) + f(2.0)) / (2.0 * h.powi(3)),
            _ => (f(-2.0) - 4.0 * f(-1.0) + 6.0 * f(0.0) - 4.0 * f(1.0) + f(2.0)) / h.powi(4),
        }
    }

    fn sup_derivative(&self) -> f64 {
        let (c, r) = self.cr();
        let m = 4 * self.derivs[1].len() + 2000;
        let inside = (0..=m)
            .map(|k| cheb::eval_t(&self.derivs[1], (PI * k as f64 / m as f64).cos()).abs() / r)
            .fold(0.0, f64::max);
        let (lo, hi) = self.domain;
        let mut outside = 0.0f64;
        for k in 0..=400 {
            let x = lo + (hi - lo) * k as f64 / 400.0;
            if ((x - c) / r).abs() > 1.0 {
                outside = outside.max(self.psi_derivative(1, x).abs());
            }
        }
        inside.max(outside)
    }

    fn check_residual(&mut self, eq: &EquilibriumMeasure) {
        let (c, r) = self.cr();
        let psi = |x: f64| self.psi(x);
        let dpsi = |x: f64| self.psi_derivative(1, x);
        let breaks = self.xi.breaks();
        let resid = |x: f64| master_operator(&psi, &dpsi, eq, &self.potential, x, &breaks) - self.xi.value(x);
        let mut worst = 0.0f64;
        let mut bulk = Vec::new();
        for k in 0..41 {
            let x = c + r * (PI * (k as f64 + 0.5) / 41.0).cos();
            let d = resid(x);
            if eq.in_bulk(x) {
                bulk.push(d);
            }
            worst = worst.max((d - self.c_xi).abs());
        }
        let (lo, hi) = self.domain;
        for k in 1..=5 {
            let s = k as f64 / 5.0;
            for x in [self.interval.a - s * (self.interval.a - lo), self.interval.b + s * (hi - self.interval.b)] {
                worst = worst.max((resid(x) - self.c_xi).abs());
            }
        }
        self.residual = worst;
        self.residual_spread = crate::numerics::stats::variance(&bulk).sqrt();
    }

    /// Cache key `(potential label, xi descriptor, grid size)`.
    pub fn cache_key(&self) -> String {
        format!("{}|{}|{}", self.potential.label(), self.xi.descriptor(), self.derivs[0].len())
    }

    pub fn record(&self, points: usize) -> TransportRecord {
        let (c, r) = self.cr();
        let grid_inside: Vec<f64> = cheb::nodes(points).into_iter().map(|v| c + r * v).collect();
        let values_inside = grid_inside.iter().map(|&x| self.psi(x)).collect();
        let (lo, hi) = self.domain;
        let grid_outside: Vec<f64> = (0..=points)
            .map(|k| lo + (hi - lo) * k as f64 / points as f64)
            .filter(|x| !self.interval.contains(*x))
            .collect();
        let values_outside = grid_outside.iter().map(|&x| self.psi(x)).collect();
        TransportRecord {
            key: self.cache_key(),
            xi: self.xi.clone(),
            grid_inside,
            values_inside,
            grid_outside,
            values_outside,
            c_xi: self.c_xi,
            residual: self.residual,
        }
    }

    pub fn write_json(&self, path: &Path, points: usize) -> Result<()> {
        let s = serde_json::to_string_pretty(&self.record(points))?;
        std::fs::write(path, s).map_err(|e| Error::io(path, e))
    }

    /// Full state for caching; `None` for closure potentials.
    pub fn state(&self) -> Option<TransportState> {
        Some(TransportState {
            xi: self.xi.clone(),
            interval: self.interval.clone(),
            xi_coeffs: self.xi_coeffs.clone(),
            derivs: self.derivs.clone(),
            c_xi: self.c_xi,
            residual: self.residual,
            residual_spread: self.residual_spread,
            psi_prime_sup: self.psi_prime_sup,
            domain: self.domain,
            stieltjes_b: self.stieltjes_b.clone(),
            potential: self.potential.spec()?,
        })
    }

    pub fn from_state(s: TransportState) -> Result<Self> {
        if s.derivs.len() != 5 || s.derivs[0].is_empty() {
            return Err(Error::invalid("transport state", "expected psi and four derivative series"));
        }
        Ok(TransportMap {
            xi: s.xi,
            interval: s.interval,
            xi_coeffs: s.xi_coeffs,
            derivs: s.derivs,
            c_xi: s.c_xi,
            residual: s.residual,
            residual_spread: s.residual_spread,
            psi_prime_sup: s.psi_prime_sup,
            domain: s.domain,
            stieltjes_b: s.stieltjes_b,
            potential: Potential::from_spec(&s.potential),
        })
    }

    /// `int psi' dmu_V`, the mean-shift integral.
    pub fn mean_shift_integral(&self, eq: &EquilibriumMeasure) -> f64 {
        let mut br = self.breaks();
        br.extend([self.interval.a, self.interval.b]);
        eq.integrate(|x| self.psi_derivative(1, x), &br, 1e-10)
    }

    /// Rejects `t` unless `|t| sup|psi'| < 1/2`.
    pub fn check_t(&self, t: f64) -> Result<()> {
        let value = t.abs() * self.psi_prime_sup;
        if !(value < 0.5) {
            return Err(Error::TooLargeT { value });
        }
        Ok(())
    }

    /// `phi_t'(x) = 1 + t psi'(x)`.
    pub fn flow_derivative(&self, t: f64, x: f64) -> f64 {
        1.0 + t * self.psi_derivative(1, x)
    }

    /// Integral over the support with the bump's breaks added.
    pub(crate) fn breaks(&self) -> Vec<f64> {
        self.xi.breaks()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }
}

/// `phi_t(x) = x + t psi(x)`.
pub fn transport_flow(map: &TransportMap, t: f64, x: f64) -> Result<f64> {
    map.check_t(t)?;
    Ok(x + t * map.psi(x))
}

/// `|mass(phi_t # mu_V) - mass(mu_V)|`, integrating the pushed-forward density
/// `mu_V(phi^{-1}(y)) / phi'(phi^{-1}(y))` over `y` after inverting the flow numerically.
pub fn push_forward_mass_check(map: &TransportMap, eq: &EquilibriumMeasure, t: f64) -> Result<f64> {
    map.check_t(t)?;
    let (a, b) = (map.interval.a, map.interval.b);
    let phi = |x: f64| x + t * map.psi(x);
    let (ya, yb) = (phi(a), phi(b));
    let invert = |y: f64| {
        // phi is increasing with phi' in [1/2, 3/2]
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (y - ya) / (yb - ya) * (b - a);
        for _ in 0..100 {
            let f = phi(x) - y;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = f / map.flow_derivative(t, x);
            let nx = x - step;
            x = if nx > lo && nx < hi { nx } else { 0.5 * (lo + hi) };
            if step.abs() < 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        x
    };
    // y = ya + (yb - ya)(1 - cos th)/2 absorbs the square-root edges
    let m = 4000;
    let mut mass = 0.0;
    for k in 0..m {
        let th = PI * (k as f64 + 0.5) / m as f64;
        let y = ya + 0.5 * (yb - ya) * (1.0 - th.cos());
        let x = invert(y);
        let dens = eq.density(x) / map.flow_derivative(t, x);
        mass += dens * 0.5 * (yb - ya) * th.sin() * PI / m as f64;
    }
    Ok((mass - eq.mass()).abs())
}

/// `tau_t(x) = int -log|phi_t(x) - phi_t(y)| dmu_V(y) + V_t(phi_t(x)) - h(x) - V(x) + t c_xi`
/// with `V_t = V + t xi`. The log is desingularized as `-log(1 + t (psi(x) - psi(y)) / (x - y))`.
pub fn energy_difference(map: &TransportMap, eq: &EquilibriumMeasure, t: f64, x: f64) -> Result<f64> {
    map.check_t(t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let px = map.psi(x);
    let dx = map.psi_derivative(1, x);
    let q = |y: f64| {
        let d = x - y;
        let ratio = if d.abs() < 1e-9 { dx } else { (px - map.psi(y)) / d };
        -(t * ratio).ln_1p()
    };
    let mut br = map.breaks();
    br.push(x);
    let log_part = eq.integrate(q, &br, 1e-13);
    let v = map.potential();
    let y = x + t * px;
    Ok(log_part + v.value(y) + t * map.xi.value(y) - v.value(x) + t * map.c_xi)
}

/// Fitted far-field decay of `|psi^{(k)}|` around a rescaled bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub order: usize,
    /// `p` in `|psi^{(k)}(x)| ~ |x - z|^{-p}`.
    pub exponent: f64,
    pub distances: Vec<f64>,
    pub values: Vec<f64>,
    /// `sup |psi^{(k)}| L^k` over the support of the bump.
    pub inside_sup_scaled: f64,
}

/// Log-log fit of `|psi^{(k)}|` against `|x - z|` outside twice the bump support, inside the support of `mu_V`.
pub fn decay_profile(map: &TransportMap, eq: &EquilibriumMeasure, k: usize) -> Result<DecayProfile> {
    let (z, l) = match map.xi {
        TestFunction::RescaledBump { z, l } => (z, l),
        _ => return Err(Error::InsufficientRange("decay profiles need a rescaled bump".into())),
    };
    let inside_sup_scaled = (0..=400)
        .map(|j| map.psi_derivative(k, z - l + 2.0 * l * j as f64 / 400.0).abs())
        .fold(0.0, f64::max)
        * l.powi(k as i32);
    if !eq.in_bulk(z) {
        return Err(Error::InsufficientRange(format!("centre {z} is outside the bulk")));
    }
    let (sa, sb) = (map.interval.a, map.interval.b);
    let dmin = 2.0 * l;
    let dmax = 0.95 * (z - sa).min(sb - z);
    if dmax < 4.0 * dmin {
        return Err(Error::InsufficientRange(format!("distances [{dmin}, {dmax}] span less than a factor 4")));
    }
    let mut distances = Vec::new();
    let mut values = Vec::new();
    let count = 16;
    for j in 0..count {
        let d = dmin * (dmax / dmin).powf(j as f64 / (count - 1) as f64);
        for x in [z - d, z + d] {
            distances.push(d);
            values.push(map.psi_derivative(k, x).abs());
        }
    }
    let lx: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.max(1e-300).ln()).collect();
    let fit = crate::numerics::stats::linear_fit(&lx, &ly);
    Ok(DecayProfile { order: k, exponent: -fit.slope, distances, values, inside_sup_scaled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_equilibrium, Method};

    fn semicircle() -> EquilibriumMeasure {
        solve_equilibrium(&Potential::quadratic(), 512, Method::AnalyticOneCut).unwrap()
    }

    fn poly(c: &[f64]) -> TestFunction {
        TestFunction::Polynomial { coefficients: c.to_vec() }
    }

    #[test]
    fn linear_source_gives_constant_map() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let m = solve_transport(&poly(&[0.0, 1.0]), &eq, &v).unwrap();
        for x in [-0.9, -0.3, 0.0, 0.5, 0.99, 1.2, -1.4] {
            assert!((m.psi(x) + 0.5).abs() < 1e-9, "{x}: {}", m.psi(x));
        }
        assert!(m.c_xi.abs() < 1e-12);
        assert!(m.residual < 1e-8 && m.residual_spread < 1e-5);
    }

    #[test]
    fn quadratic_source() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let m = solve_transport(&poly(&[0.0, 0.0, 1.0]), &eq, &v).unwrap();
        for x in [-0.7, 0.1, 0.8, 1.3] {
            assert!((m.psi(x) + 0.5 * x).abs() < 1e-9);
        }
        assert!((m.c_xi + 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_source() {
        let eq = semicircle();
        let m = solve_transport(&poly(&[0.0]), &eq, &Potential::quadratic()).unwrap();
        assert_eq!(m.c_xi, 0.0);
        assert!(m.psi(0.3) == 0.0 && m.psi(1.3).abs() < 1e-15);
    }

    #[test]
    fn master_operator_examples() {
        let eq = semicircle();
        let v = Potential::quadratic();
        for x in [-0.5, 0.2, 1.5] {
            let c = master_operator(&|_| 3.0, &|_| 0.0, &eq, &v, x, &[]);
            assert!((c + 3.0 * 2.0 * x).abs() < 1e-12);
            let q = master_operator(&|y| -0.5 * y, &|_| -0.5, &eq, &v, x, &[]);
            assert!((q - (x * x - 0.5)).abs() < 1e-10);
            let f1 = |y: f64| y.sin();
            let f2 = |y: f64| y * y * y;
            let lin = master_operator(&|y| 2.0 * f1(y) - 3.0 * f2(y), &|y| 2.0 * y.cos() - 9.0 * y * y, &eq, &v, x, &[]);
            let sep = 2.0 * master_operator(&f1, &|y| y.cos(), &eq, &v, x, &[])
                - 3.0 * master_operator(&f2, &|y| 3.0 * y * y, &eq, &v, x, &[]);
            assert!((lin - sep).abs() < 1e-10);
        }
    }

    #[test]
    fn bump_transport_and_residual() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let m = solve_transport(&TestFunction::bump(0.1, 0.2), &eq, &v).unwrap();
        assert!(m.residual < 1e-6, "{}", m.residual);
        assert!(m.residual_spread < 1e-5);
        // continuity across the edges
        for e in [-1.0, 1.0] {
            let inside = m.psi(e * (1.0 - 1e-7));
            let outside = m.psi(e * (1.0 + 1e-7));
            assert!((inside - outside).abs() < 1e-5, "{inside} {outside}");
        }
    }

    #[test]
    fn flow_and_mass() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let m = solve_transport(&poly(&[0.0, 1.0]), &eq, &v).unwrap();
        assert_eq!(transport_flow(&m, 0.0, 0.3).unwrap(), 0.3);
        assert!((transport_flow(&m, 0.1, 0.3).unwrap() - 0.25).abs() < 1e-10);
        assert!(push_forward_mass_check(&m, &eq, 0.0).unwrap() < 1e-8);
        let b = solve_transport(&TestFunction::bump(0.0, 0.3), &eq, &v).unwrap();
        let t = 0.3 / b.psi_prime_sup;
        assert!(push_forward_mass_check(&b, &eq, t).unwrap() < 1e-8);
        let too_big = 0.6 / b.psi_prime_sup;
        assert!(matches!(transport_flow(&b, too_big, 0.0), Err(Error::TooLargeT { .. })));
    }

    #[test]
    fn energy_difference_is_quadratic_in_t() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let m = solve_transport(&TestFunction::bump(0.1, 0.3), &eq, &v).unwrap();
        assert_eq!(energy_difference(&m, &eq, 0.0, 0.2).unwrap(), 0.0);
        for x in [0.0, 0.15, 0.6, -0.8] {
            let t = 0.005;
            let r1 = energy_difference(&m, &eq, t, x).unwrap() / (t * t);
            let r2 = energy_difference(&m, &eq, t / 2.0, x).unwrap() / (t * t / 4.0);
            assert!((r1 - r2).abs() < 0.05 * r2.abs().max(1e-3), "x={x}: {r1} {r2}");
        }
    }

    #[test]
    fn mesoscopic_tau_bound_is_stable() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let mut consts = Vec::new();
        for l in [0.2, 0.1, 0.05] {
            let m = solve_transport(&TestFunction::bump(0.0, l), &eq, &v).unwrap();
            let t = 0.2 / m.psi_prime_sup;
            let sup = (0..=40)
                .map(|j| energy_difference(&m, &eq, t, -2.0 * l + 4.0 * l * j as f64 / 40.0).unwrap().abs())
                .fold(0.0, f64::max);
            consts.push(sup / (t * t / l));
        }
        let (lo, hi) = consts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo < 3.0, "{consts:?}");
    }

    #[test]
    fn decay_of_mesoscopic_transport() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let m = solve_transport(&TestFunction::bump(0.0, 0.05), &eq, &v).unwrap();
        let p = decay_profile(&m, &eq, 0).unwrap();
        assert!((0.8..=1.2).contains(&p.exponent), "{}", p.exponent);
        let mut scaled = Vec::new();
        for l in [0.1, 0.05, 0.025] {
            let m = solve_transport(&TestFunction::bump(0.0, l), &eq, &v).unwrap();
            scaled.push(decay_profile(&m, &eq, 1).unwrap().inside_sup_scaled);
        }
        let bound = 10.0 * crate::fluctuations::bump_ck_norm(3);
        assert!(scaled.iter().all(|s| *s < bound), "{scaled:?}");
        let c = solve_transport(&poly(&[2.5]), &eq, &v).unwrap();
        assert!(c.psi(0.4) == 0.0);
    }

    #[test]
    fn mesoscopic_maps_are_scale_covariant() {
        let eq = semicircle();
        let v = Potential::quadratic();
        let (z, l) = (0.1, 0.04);
        let big = solve_transport(&TestFunction::bump(z, l), &eq, &v).unwrap();
        let small = solve_transport(&TestFunction::bump(z, l / 2.0), &eq, &v).unwrap();
        let ss = [-0.8, -0.3, 0.0, 0.5, 0.9];
        let sup = ss.iter().map(|s| big.psi(z + s * l).abs()).fold(0.0, f64::max);
        for s in ss {
            let a = big.psi(z + s * l);
            let b = small.psi(z + s * l / 2.0);
            assert!((a - b).abs() < 0.05 * sup, "{s}: {a} {b}");
        }
    }

    #[test]
    fn multi_cut_is_unsupported() {
        let v = Potential::polynomial("double well", vec![0.0, 0.0, -4.0, 0.0, 1.0]);
        let eq = solve_equilibrium(&v, 1024, Method::DiscretizedMinimization).unwrap();
        assert!(matches!(solve_transport(&poly(&[0.0, 1.0]), &eq, &v), Err(Error::UnsupportedMeasure(_))));
    }

    #[test]
    fn record_serializes() {
        let eq = semicircle();
        let m = solve_transport(&poly(&[0.0, 1.0]), &eq, &Potential::quadratic()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("map.json");
        m.write_json(&p, 16).unwrap();
        let r: TransportRecord = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(r.values_inside.len(), 16);
        assert!(r.key.starts_with("x^2|poly"));
        let back = TransportMap::from_state(serde_json::from_str(&serde_json::to_string(&m.state().unwrap()).unwrap()).unwrap()).unwrap();
        assert_eq!(back.psi(0.3), m.psi(0.3));
        assert_eq!(back.psi(1.2), m.psi(1.2));
    }
}
