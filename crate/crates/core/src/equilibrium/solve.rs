use std::f64::consts::PI;

use super::measure::{
    cell_log_kernel, cell_potential, EquilibriumMeasure, GridDensity, Interval, Method, Tolerances,
};
use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::{cheb, linalg, linalg::Toeplitz};

const EL_TOL: f64 = 1e-3;

/// Solves for the equilibrium measure of `potential`.
pub fn solve_equilibrium(potential: &Potential, grid_size: usize, method: Method) -> Result<EquilibriumMeasure> {
    if grid_size < 256 {
        return Err(Error::invalid("grid_size", format!("{grid_size} < 256")));
    }
    potential.check_growth()?;
    match method {
        Method::AnalyticOneCut => analytic_one_cut(potential, grid_size),
        Method::DiscretizedMinimization => discretized(potential, grid_size),
        Method::UserSupplied => Err(Error::invalid("method", "user-supplied measures are built with from_user_data")),
    }
}

fn one_cut_conditions(v: &Potential, c: f64, r: f64, m: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    // Gauss-Chebyshev: int f(u)/sqrt(1-u^2) du = pi/m sum f(u_k)
    let nodes = cheb::nodes(m);
    let (mut i0, mut i1, mut j0, mut j1, mut j2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &u in &nodes {
        let x = c + r * u;
        let d1 = v.d1(x);
        let d2 = v.d2(x);
        i0 += d1;
        i1 += d1 * u;
        j0 += d2;
        j1 += d2 * u;
        j2 += d2 * u * u;
    }
    let w = 1.0 / m as f64;
    let (i0, i1, j0, j1, j2) = (i0 * w, i1 * w, j0 * w, j1 * w, j2 * w);
    // F1 = (1/pi) int V'/sqrt, F2 = (r/pi) int V' u/sqrt - 1
    let f = [i0, r * i1 - 1.0];
    let jac = [[j0, j1], [r * j1, i1 + r * j2]];
    (f, jac)
}

fn analytic_one_cut(v: &Potential, grid_size: usize) -> Result<EquilibriumMeasure> {
    let m = grid_size.max(64);
    let (mut c, mut r) = (0.0f64, 1.0f64);
    // scale guess: r V'(r) ~ 2
    for _ in 0..60 {
        let g = r * 0.5 * (v.d1(c + r) - v.d1(c - r));
        if (g - 2.0).abs() < 0.5 {
            break;
        }
        r *= if g < 2.0 { 1.5 } else { 1.0 / 1.5 };
    }
    let mut converged = false;
    let mut res = f64::INFINITY;
    for _ in 0..200 {
        let (f, j) = one_cut_conditions(v, c, r, m);
        res = f[0].abs().max(f[1].abs());
        if res < 1e-13 {
            converged = true;
            break;
        }
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            break;
        }
        let dc = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dr = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut lam = 1.0;
        while r - lam * dr <= 0.0 {
            lam *= 0.5;
        }
        c -= lam * dc;
        r -= lam * dr;
    }
    if !converged {
        return Err(Error::NoConvergence { what: "one-cut endpoint conditions".into(), residual: res });
    }
    let fcoef = cheb::chop(cheb::interpolate(|u| v.d1(c + r * u), m), 1e-15);
    let coeffs: Vec<f64> = fcoef.iter().skip(1).map(|fn_| r * fn_ / PI).collect();
    let iv = Interval { a: c - r, b: c + r, coeffs };

    let probe = 2001;
    let smax = (0..probe)
        .map(|k| iv.p(-1.0 + 2.0 * k as f64 / (probe - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    for k in 0..probe {
        let u = -1.0 + 2.0 * k as f64 / (probe - 1) as f64;
        if iv.p(u) <= 1e-8 * smax {
            return Err(Error::MultiCutDetected { x: c + r * u });
        }
    }
    let eq = finish(v, Method::AnalyticOneCut, grid_size, vec![iv], None)?;
    if eq.tolerances.min_zeta_off_support < -EL_TOL {
        let (lo, hi) = eq.working_box();
        let x = (0..=400)
            .map(|k| lo + (hi - lo) * k as f64 / 400.0)
            .filter(|x| !eq.in_support(*x))
            .min_by(|p, q| eq.effective_potential(v, *p).total_cmp(&eq.effective_potential(v, *q)))
            .unwrap_or(lo);
        return Err(Error::MultiCutDetected { x });
    }
    Ok(eq)
}

/// Minimizes the discrete energy over nonnegative cell densities of unit mass on `[lo, hi]`
/// by a primal-dual active-set iteration; each equality-constrained subproblem is solved by
/// conjugate gradients with FFT Toeplitz products.
pub fn minimize_on_grid(v: &Potential, lo: f64, hi: f64, n: usize) -> Result<GridDensity> {
    let dx = (hi - lo) / n as f64;
    let shift = dx * dx * (hi - lo).ln();
    let col: Vec<f64> = (0..n).map(|m| cell_log_kernel(m, dx) + shift).collect();
    let t = Toeplitz::new(&col);
    let mut grid = GridDensity { lo, dx, values: vec![0.0; n] };
    let vc = cell_potential(&grid, v);

    let mut active: Vec<bool> = vec![true; n];
    let mut rho = vec![0.0; n];
    let mut last_res = f64::INFINITY;
    for _outer in 0..100 {
        let idx: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
        if idx.is_empty() {
            return Err(Error::NoConvergence { what: "active set emptied".into(), residual: f64::NAN });
        }
        let op = |x: &[f64]| {
            let mut full = vec![0.0; n];
            for (k, &j) in idx.iter().enumerate() {
                full[j] = x[k];
            }
            let y = t.apply(&full);
            idx.iter().map(|&j| y[j]).collect::<Vec<f64>>()
        };
        let rhs1: Vec<f64> = idx.iter().map(|&j| -vc[j]).collect();
        let rhs2: Vec<f64> = vec![dx; idx.len()];
        let (y1, r1) = linalg::cg(&op, &rhs1, 1e-12, 20_000);
        let (y2, r2) = linalg::cg(&op, &rhs2, 1e-12, 20_000);
        last_res = r1.max(r2);
        let s1: f64 = y1.iter().sum::<f64>() * dx;
        let s2: f64 = y2.iter().sum::<f64>() * dx;
        let lambda = (1.0 - s1) / s2;
        rho.iter_mut().for_each(|r| *r = 0.0);
        for (k, &j) in idx.iter().enumerate() {
            rho[j] = y1[k] + lambda * y2[k];
        }
        let grad = t.apply(&rho);
        let mut changed = false;
        for j in 0..n {
            let z = (grad[j] + vc[j]) / dx - lambda;
            let keep = if active[j] { rho[j] > 0.0 } else { -z > 0.0 };
            if keep != active[j] {
                changed = true;
                active[j] = keep;
            }
        }
        if !changed {
            grid.values = rho.iter().map(|r| r.max(0.0)).collect();
            let m = grid.mass();
            grid.values.iter_mut().for_each(|r| *r /= m);
            return Ok(grid);
        }
    }
    Err(Error::NoConvergence { what: "active-set minimization".into(), residual: last_res })
}

fn runs(grid: &GridDensity) -> Vec<(usize, usize)> {
    let max = grid.values.iter().copied().fold(0.0, f64::max);
    let thr = 1e-6 * max;
    let mut out = Vec::new();
    let mut start = None;
    for (j, &r) in grid.values.iter().enumerate() {
        match (r > thr, start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                out.push((s, j - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, grid.values.len() - 1));
    }
    out
}

/// Square-root edge: extrapolates the zero of `rho^2`, linear near the edge.
fn snap_edge(grid: &GridDensity, cells: &[usize], crude: f64) -> f64 {
    let xs: Vec<f64> = cells.iter().map(|&j| grid.lo + (j as f64 + 0.5) * grid.dx).collect();
    let ys: Vec<f64> = cells.iter().map(|&j| grid.values[j].powi(2)).collect();
    if xs.len() < 3 {
        return crude;
    }
    let fit = crate::numerics::stats::linear_fit(&xs, &ys);
    let root = -fit.intercept / fit.slope;
    if root.is_finite() && (root - crude).abs() < 4.0 * grid.dx {
        root
    } else {
        crude
    }
}

/// Least-squares fit of `sqrt(1-v^2) sum b_n U_{n-1}` to the cell masses over `[a, b]`.
fn fit_interval(grid: &GridDensity, a: f64, b: f64, k: usize) -> Interval {
    let mut iv = Interval { a, b, coeffs: vec![0.0; k] };
    let n = grid.values.len();
    let j0 = (((a - grid.lo) / grid.dx).floor() as isize - 2).max(0) as usize;
    let j1 = ((((b - grid.lo) / grid.dx).ceil() as isize) + 2).min(n as isize) as usize;
    let basis: Vec<Vec<f64>> = (0..k)
        .map(|m| {
            let mut e = Interval { a, b, coeffs: vec![0.0; k] };
            e.coeffs[m] = 1.0;
            (j0..j1)
                .map(|j| {
                    let x0 = grid.lo + j as f64 * grid.dx;
                    e.cdf(x0 + grid.dx) - e.cdf(x0)
                })
                .collect()
        })
        .collect();
    let target: Vec<f64> = (j0..j1).map(|j| grid.values[j] * grid.dx).collect();
    let mut ata = vec![vec![0.0; k]; k];
    let mut atb = vec![0.0; k];
    for p in 0..k {
        for q in 0..k {
            ata[p][q] = linalg::dot(&basis[p], &basis[q]);
        }
        atb[p] = linalg::dot(&basis[p], &target);
    }
    if let Some(c) = linalg::solve_dense(ata, atb) {
        iv.coeffs = c;
    }
    iv
}

fn discretized(v: &Potential, grid_size: usize) -> Result<EquilibriumMeasure> {
    // locate the support on a coarse box, doubling until it fits
    let mut center = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..=2000 {
        let x = -10.0 + 0.01 * k as f64;
        if v.value(x) < best {
            best = v.value(x);
            center = x;
        }
    }
    let mut half = 2.0;
    let mut coarse = None;
    for _ in 0..12 {
        let g = minimize_on_grid(v, center - half, center + half, 512)?;
        let rs = runs(&g);
        let n = g.values.len();
        let touches = rs.iter().any(|&(s, e)| s < n / 50 || e + n / 50 >= n);
        if !touches {
            coarse = Some(g);
            break;
        }
        half *= 2.0;
    }
    let coarse = coarse.ok_or_else(|| Error::NoConvergence { what: "support bracketing".into(), residual: half })?;
    let rs = runs(&coarse);
    let a0 = coarse.lo + rs.first().map_or(0, |r| r.0) as f64 * coarse.dx;
    let b0 = coarse.lo + (rs.last().map_or(0, |r| r.1) + 1) as f64 * coarse.dx;
    let (c, r) = (0.5 * (a0 + b0), 0.5 * (b0 - a0) + coarse.dx);
    let grid = minimize_on_grid(v, c - 1.5 * r, c + 1.5 * r, grid_size)?;

    let mut intervals = Vec::new();
    let k_fit = (grid_size / 128).clamp(4, 24);
    for (s, e) in runs(&grid) {
        let len = e + 1 - s;
        let w = (len / 40).max(6);
        let crude_a = grid.lo + s as f64 * grid.dx;
        let crude_b = grid.lo + (e + 1) as f64 * grid.dx;
        let left: Vec<usize> = (s + 2..(s + 2 + w).min(e)).collect();
        let right: Vec<usize> = ((e.saturating_sub(1 + w)).max(s)..e.saturating_sub(1)).collect();
        let a = snap_edge(&grid, &left, crude_a);
        let b = snap_edge(&grid, &right, crude_b);
        intervals.push(fit_interval(&grid, a, b, k_fit));
    }
    let total: f64 = intervals.iter().map(Interval::mass).sum();
    for iv in intervals.iter_mut() {
        iv.coeffs.iter_mut().for_each(|c| *c /= total);
    }
    finish(v, Method::DiscretizedMinimization, grid_size, intervals, Some(grid))
}

/// Builds a measure from user-supplied support intervals and `S` on each, then validates it.
pub fn from_user_data<S: Fn(f64) -> f64>(
    potential: &Potential,
    support: &[(f64, f64)],
    s_factor: S,
    grid_size: usize,
) -> Result<EquilibriumMeasure> {
    if support.is_empty() || support.iter().any(|(a, b)| !(b > a)) {
        return Err(Error::UnsupportedMeasure("support must be nonempty ordered intervals".into()));
    }
    let m = grid_size.max(64);
    let mut intervals = Vec::new();
    for (k, &(a, b)) in support.iter().enumerate() {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        // p(v) = S(x) r^2 prod_{j != k} sqrt|x-a_j||x-b_j|, expanded in U_{n-1} by a sine transform
        let p = |v: f64| {
            let x = c + r * v;
            let others: f64 = support
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, (aj, bj))| ((x - aj).abs() * (x - bj).abs()).sqrt())
                .product();
            s_factor(x) * r * r * others
        };
        let th: Vec<f64> = (1..=m).map(|j| PI * j as f64 / (m + 1) as f64).collect();
        let pv: Vec<f64> = th.iter().map(|t| p(t.cos()) * t.sin()).collect();
        let coeffs: Vec<f64> = (1..=m.min(256))
            .map(|n| {
                2.0 / (m + 1) as f64 * th.iter().zip(&pv).map(|(t, f)| f * (n as f64 * t).sin()).sum::<f64>()
            })
            .collect();
        intervals.push(Interval { a, b, coeffs: cheb::chop(coeffs, 1e-15) });
    }
    finish(potential, Method::UserSupplied, grid_size, intervals, None)
}

/// Computes `c_V`, the log energy, grid representation, and validates the invariants.
fn finish(
    v: &Potential,
    method: Method,
    grid_size: usize,
    intervals: Vec<Interval>,
    grid: Option<GridDensity>,
) -> Result<EquilibriumMeasure> {
    let shortest = intervals.iter().map(|i| i.b - i.a).fold(f64::INFINITY, f64::min);
    let mut eq = EquilibriumMeasure {
        label: v.label().to_string(),
        method,
        grid_size,
        intervals,
        c_v: 0.0,
        bulk_margin: 0.25 * shortest,
        log_energy: 0.0,
        grid: GridDensity { lo: 0.0, dx: 1.0, values: vec![] },
        tolerances: Tolerances { mass_error: 0.0, min_density: 0.0, el_residual_bulk: 0.0, min_zeta_off_support: 0.0 },
    };
    let bulk = eq.bulk();
    let (ba, bb) = bulk.first().copied().unwrap_or_else(|| eq.hull());
    let pts: Vec<f64> = (0..11).map(|k| ba + (bb - ba) * k as f64 / 10.0).collect();
    eq.c_v = pts.iter().map(|&x| eq.log_potential(x) + v.value(x)).sum::<f64>() / pts.len() as f64;
    eq.log_energy = eq.integrate(|x| eq.log_potential(x), &[], 1e-13);

    eq.grid = match grid {
        Some(g) => g,
        None => {
            let (lo, hi) = eq.working_box();
            let dx = (hi - lo) / grid_size as f64;
            let values = (0..grid_size)
                .map(|j| {
                    let x0 = lo + j as f64 * dx;
                    (eq.cdf(x0 + dx) - eq.cdf(x0)) / dx
                })
                .collect();
            GridDensity { lo, dx, values }
        }
    };

    let mut el = 0.0f64;
    for &(a, b) in &bulk {
        for k in 0..=200 {
            let x = a + (b - a) * k as f64 / 200.0;
            el = el.max(eq.effective_potential(v, x).abs());
        }
    }
    let (lo, hi) = eq.working_box();
    let mut zmin = f64::INFINITY;
    for k in 0..=600 {
        let x = lo + (hi - lo) * k as f64 / 600.0;
        if !eq.in_support(x) {
            zmin = zmin.min(eq.effective_potential(v, x));
        }
    }
    let mut dmin = f64::INFINITY;
    for iv in &eq.intervals {
        for k in 0..=400 {
            dmin = dmin.min(iv.p(-1.0 + k as f64 / 200.0));
        }
    }
    eq.tolerances = Tolerances {
        mass_error: (eq.mass() - 1.0).abs(),
        min_density: dmin,
        el_residual_bulk: el,
        min_zeta_off_support: zmin,
    };
    if eq.tolerances.mass_error > 1e-8 || dmin < 0.0 {
        return Err(Error::NotAProbability { mass: eq.mass(), min: dmin });
    }
    if el > EL_TOL {
        return Err(Error::NoConvergence { what: "Euler-Lagrange residual".into(), residual: el });
    }
    Ok(eq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::Background;
    use crate::equilibrium::energy_functional;
    use crate::numerics::quad;
    use rand::{Rng, SeedableRng};

    fn semicircle_log_potential(x: f64) -> f64 {
        // independent oracle: direct quadrature of -log|x-y| against (2/pi) sqrt(1-y^2)
        let f = |y: f64| -(x - y).abs().ln() * 2.0 / PI * (1.0 - y * y).max(0.0).sqrt();
        let mut br = vec![-1.0, 1.0];
        if x.abs() < 1.0 {
            br.insert(1, x);
        }
        quad::adaptive(f, &br, 1e-13, 1e-13).value
    }

    #[test]
    fn quadratic_closed_form() {
        let v = Potential::quadratic();
        let eq = solve_equilibrium(&v, 512, Method::AnalyticOneCut).unwrap();
        let (a, b) = eq.hull();
        assert!((a + 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        assert!((eq.density(0.0) - 2.0 / PI).abs() < 1e-12);
        let c_oracle = semicircle_log_potential(0.0);
        assert!((eq.c_v - c_oracle).abs() < 1e-9, "{} {}", eq.c_v, c_oracle);
        assert!((eq.c_v - (2f64.ln() + 0.5)).abs() < 1e-10);
        assert!((eq.energy(&v) - (0.375 + 0.5 * 2f64.ln())).abs() < 1e-10);
        assert!(eq.tolerances.el_residual_bulk < 1e-10);
    }

    #[test]
    fn effective_potential_off_support() {
        let v = Potential::quadratic();
        let eq = solve_equilibrium(&v, 512, Method::AnalyticOneCut).unwrap();
        assert!(eq.effective_potential(&v, 0.5).abs() < 1e-3);
        let z2 = eq.effective_potential(&v, 2.0);
        let oracle = semicircle_log_potential(2.0) + 4.0 - eq.c_v;
        assert!((z2 - oracle).abs() < 1e-9, "{z2} {oracle}");
        let z3 = eq.effective_potential(&v, 3.0);
        assert!(z3 > z2 && z2 > 0.0);
    }

    #[test]
    fn discretized_matches_semicircle() {
        let v = Potential::quadratic();
        let eq = solve_equilibrium(&v, 1024, Method::DiscretizedMinimization).unwrap();
        assert!((eq.density(0.0) - 2.0 / PI).abs() < 1e-3);
        let (a, b) = eq.hull();
        assert!((a + 1.0).abs() < 5e-3 && (b - 1.0).abs() < 5e-3);
        assert!(eq.tolerances.el_residual_bulk < 1e-3);
        assert!((eq.mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn discretized_residual_contracts_with_grid() {
        let v = Potential::quadratic();
        let r: Vec<f64> = [256, 512, 1024]
            .iter()
            .map(|&n| solve_equilibrium(&v, n, Method::DiscretizedMinimization).unwrap().tolerances.el_residual_bulk)
            .collect();
        assert!(r[1] <= 0.75 * r[0] && r[2] <= 0.75 * r[1], "{r:?}");
    }

    #[test]
    fn flat_potential_is_not_confining() {
        let v = Potential::polynomial("flat", vec![0.0]);
        for m in [Method::AnalyticOneCut, Method::DiscretizedMinimization] {
            assert!(matches!(solve_equilibrium(&v, 512, m), Err(Error::NonConfining { .. })));
        }
    }

    #[test]
    fn small_grid_rejected() {
        let v = Potential::quadratic();
        assert!(solve_equilibrium(&v, 128, Method::AnalyticOneCut).unwrap_err().is_validation());
    }

    #[test]
    fn deep_double_well_is_two_cut() {
        let v = Potential::polynomial("well", vec![0.0, 0.0, -4.0, 0.0, 1.0]);
        assert!(matches!(
            solve_equilibrium(&v, 512, Method::AnalyticOneCut),
            Err(Error::MultiCutDetected { .. })
        ));
        let eq = solve_equilibrium(&v, 1024, Method::DiscretizedMinimization).unwrap();
        assert_eq!(eq.intervals.len(), 2);
        assert!(eq.tolerances.min_zeta_off_support > -1e-3);
    }

    #[test]
    fn quartic_methods_agree() {
        let v = Potential::polynomial("quartic", vec![0.0, 0.0, 0.5, 0.0, 0.25]);
        let a = solve_equilibrium(&v, 512, Method::AnalyticOneCut).unwrap();
        let d = solve_equilibrium(&v, 1024, Method::DiscretizedMinimization).unwrap();
        for x in [-0.8, -0.3, 0.0, 0.4, 0.9] {
            assert!((a.density(x) - d.density(x)).abs() < 2e-3, "{x}");
        }
        assert!((a.c_v - d.c_v).abs() < 1e-3);
    }

    #[test]
    fn user_data_reproduces_semicircle() {
        let v = Potential::quadratic();
        let eq = from_user_data(&v, &[(-1.0, 1.0)], |_| 2.0 / PI, 512).unwrap();
        assert!((eq.density(0.3) - 2.0 / PI * (1.0f64 - 0.09).sqrt()).abs() < 1e-12);
        assert!((eq.c_v - (2f64.ln() + 0.5)).abs() < 1e-10);
        // wrong support fails validation
        assert!(from_user_data(&v, &[(-1.2, 1.2)], |_| 2.0 / PI, 512).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let eq = solve_equilibrium(&Potential::quadratic(), 512, Method::AnalyticOneCut).unwrap();
        for p in [0.01, 0.25, 0.5, 0.9] {
            assert!((eq.cdf(eq.quantile(p)) - p).abs() < 1e-12);
        }
        let semi = |x: f64| 0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI;
        assert!((eq.cdf(0.37) - semi(0.37)).abs() < 1e-13);
    }

    #[test]
    fn energy_functional_uniform_unit_interval() {
        let n = 400;
        let g = GridDensity { lo: 0.0, dx: 1.0 / n as f64, values: vec![1.0; n] };
        let flat = Potential::polynomial("flat", vec![0.0]);
        assert!((energy_functional(&g, &flat).unwrap() - 0.75).abs() < 1e-10);
        let light = GridDensity { values: vec![0.9; n], ..g };
        assert!(matches!(energy_functional(&light, &flat), Err(Error::NotAProbability { .. })));
    }

    #[test]
    fn equilibrium_grid_is_minimal() {
        let v = Potential::quadratic();
        let eq = solve_equilibrium(&v, 1024, Method::DiscretizedMinimization).unwrap();
        let base = energy_functional(&eq.grid, &v).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut vals: Vec<f64> = eq.grid.values.iter().map(|r| (r * (1.0 + 0.3 * rng.gen_range(-1.0..1.0))).max(0.0)).collect();
            let j = rng.gen_range(0..vals.len());
            vals[j] += 0.5;
            let s = vals.iter().sum::<f64>() * eq.grid.dx;
            vals.iter_mut().for_each(|r| *r /= s);
            let pert = GridDensity { values: vals, ..eq.grid.clone() };
            assert!(energy_functional(&pert, &v).unwrap() >= base);
        }
    }

    #[test]
    fn blow_up_rescales_support_only() {
        let eq = solve_equilibrium(&Potential::quadratic(), 512, Method::AnalyticOneCut).unwrap();
        let one = eq.blow_up(1);
        assert!((one.density(0.2) - eq.density(0.2)).abs() < 1e-15);
        let s = eq.blow_up(100);
        assert_eq!(s.support(), vec![(-100.0, 100.0)]);
        assert!((s.mass() - 100.0).abs() < 1e-6 * 100.0);
        assert!((s.mass_between(-200.0, 200.0) - 100.0).abs() < 1e-10);
        assert!((s.density(0.0) - eq.density(0.0)).abs() < 1e-15);
    }

    #[test]
    fn solve_is_deterministic() {
        let v = Potential::quadratic();
        let a = solve_equilibrium(&v, 512, Method::DiscretizedMinimization).unwrap();
        let b = solve_equilibrium(&v, 512, Method::DiscretizedMinimization).unwrap();
        assert_eq!(a, b);
    }
}
