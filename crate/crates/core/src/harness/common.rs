use std::sync::Arc;

use super::spec::{Context, ExperimentSpec, Family, SamplerChoice};
use crate::cache::equilibrium_key;
use crate::equilibrium::{solve_equilibrium, EquilibriumMeasure, Potential};
use crate::error::Result;
use crate::fluctuations::{h_half_norm_squared, TestFunction};
use crate::numerics::rng::derive_seed;
use crate::numerics::stats::{self, Bootstrap};
use crate::sampler::{Configuration, SamplerSpec};
use crate::transport::{solve_transport, TransportMap};

/// Potential, its equilibrium measure and the cache key of the measure.
pub(crate) struct Setup {
    pub potential: Potential,
    pub eq: Arc<EquilibriumMeasure>,
    pub eq_key: String,
}

pub(crate) fn setup(spec: &ExperimentSpec, ctx: &Context) -> Result<Setup> {
    spec.validate()?;
    let potential = Potential::from_spec(&spec.potential);
    let eq = match &ctx.cache {
        Some(c) => c.equilibrium(&potential, spec.grid_size, spec.method)?,
        None => solve_equilibrium(&potential, spec.grid_size, spec.method)?,
    };
    let eq_key = equilibrium_key(&potential, spec.grid_size, spec.method);
    Ok(Setup { potential, eq: Arc::new(eq), eq_key })
}

pub(crate) fn transport(s: &Setup, ctx: &Context, xi: &TestFunction) -> Result<TransportMap> {
    match &ctx.cache {
        Some(c) => c.transport(&s.eq_key, xi, &s.eq, &s.potential),
        None => solve_transport(xi, &s.eq, &s.potential),
    }
}

/// Replica source for one `(beta, N)` cell. Seeds depend only on the master seed, the cell
/// indices and `purpose`, never on scheduling.
pub(crate) struct Replicas {
    inner: SamplerSpec,
    /// `V = a x^2` is sampled as `x^2` and rescaled by `1 / sqrt a`.
    rescale: f64,
}

impl Replicas {
    pub fn new(spec: &ExperimentSpec, s: &Setup, bi: usize, ni: usize, purpose: u64) -> Self {
        let (beta, n) = (spec.betas[bi], spec.ns[ni]);
        let seed = derive_seed(spec.seed, ((bi as u64) << 40) ^ ((ni as u64) << 20) ^ purpose);
        match spec.sampler {
            SamplerChoice::Tridiagonal => {
                let a = s.potential.quadratic_coefficient().unwrap_or(1.0);
                Replicas { inner: SamplerSpec::Tridiagonal { n, beta, seed }, rescale: 1.0 / a.sqrt() }
            }
            SamplerChoice::Mcmc { params } => Replicas {
                inner: SamplerSpec::Mcmc { potential: s.potential.clone(), eq: s.eq.clone(), n, beta, seed, params },
                rescale: 1.0,
            },
        }
    }

    pub fn sample(&self, k: usize) -> Result<Configuration> {
        let c = self.inner.sample(k)?;
        if self.rescale == 1.0 {
            return Ok(c);
        }
        let pts = c.points().iter().map(|x| x * self.rescale).collect();
        Configuration::new(pts, c.beta, c.provenance.clone())
    }

    pub fn name(&self) -> &'static str {
        match self.inner {
            SamplerSpec::Tridiagonal { .. } => "tridiagonal",
            SamplerSpec::Mcmc { .. } => "mcmc",
        }
    }
}

/// Stand-in for the good event: every point lies in the support hull dilated by `factor`.
pub(crate) fn good_event(points: &[f64], eq: &EquilibriumMeasure, factor: f64) -> bool {
    let (a, b) = eq.hull();
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a) * factor);
    points.iter().all(|x| (x - c).abs() <= r)
}

pub(crate) fn test_function(family: Family, z: f64, l: f64) -> TestFunction {
    match family {
        Family::Bump => TestFunction::bump(z, l),
        Family::Kappa => TestFunction::Kappa { a: z, h: l },
        Family::Zeta => TestFunction::Zeta { a: z, h: l },
    }
}

pub(crate) fn family_name(family: Family) -> &'static str {
    match family {
        Family::Bump => "bump",
        Family::Kappa => "kappa",
        Family::Zeta => "zeta",
    }
}

pub(crate) fn norm_squared(xi: &TestFunction) -> Result<f64> {
    h_half_norm_squared(xi)
}

/// `log( (1/total) sum_{good} exp(s x) )`: the empirical `log E[exp(s X) 1_G]`.
pub(crate) fn log_laplace(good: &[f64], total: usize, s: f64) -> f64 {
    if good.is_empty() {
        return f64::NEG_INFINITY;
    }
    let m = good.iter().map(|x| s * x).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = good.iter().map(|x| (s * x - m).exp()).sum();
    m + (sum / total as f64).ln()
}

/// Smallest `(a, b, c) >= 0` of least-squares shape with `a|s| + b s^2 + c |s|^3 >= target(s)`
/// on the grid: nonnegative least squares over the seven active sets, then a uniform lift.
pub(crate) fn envelope_fit(s: &[f64], target: &[f64]) -> [f64; 3] {
    let feats = |x: f64| [x.abs(), x * x, x.abs().powi(3)];
    let rows: Vec<([f64; 3], f64)> = s.iter().zip(target).filter(|(x, _)| **x != 0.0).map(|(x, t)| (feats(*x), *t)).collect();
    if rows.is_empty() {
        return [0.0; 3];
    }
    let mut best = ([0.0; 3], rows.iter().map(|(_, t)| t * t).sum::<f64>());
    for mask in 1u8..8 {
        let idx: Vec<usize> = (0..3).filter(|j| mask & (1 << j) != 0).collect();
        let k = idx.len();
        let mut ata = vec![vec![0.0; k]; k];
        let mut atb = vec![0.0; k];
        for (f, t) in &rows {
            for p in 0..k {
                atb[p] += f[idx[p]] * t;
                for q in 0..k {
                    ata[p][q] += f[idx[p]] * f[idx[q]];
                }
            }
        }
        let Some(sol) = solve_small(ata, atb) else { continue };
        if sol.iter().any(|v| *v < 0.0) {
            continue;
        }
        let mut coef = [0.0; 3];
        for (p, &j) in idx.iter().enumerate() {
            coef[j] = sol[p];
        }
        let rss: f64 = rows.iter().map(|(f, t)| (t - (coef[0] * f[0] + coef[1] * f[1] + coef[2] * f[2])).powi(2)).sum();
        if rss < best.1 {
            best = (coef, rss);
        }
    }
    let mut coef = best.0;
    let lift = rows
        .iter()
        .map(|(f, t)| (t - (coef[0] * f[0] + coef[1] * f[1] + coef[2] * f[2])) / (f[0] + f[1] + f[2]))
        .fold(0.0f64, f64::max);
    for c in &mut coef {
        *c += lift;
    }
    coef
}

/// Gaussian elimination with partial pivoting for tiny systems.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Slope of `log y` against `log x`; NaN when some `y <= 0` or fewer than two points.
pub(crate) fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 || y.iter().any(|v| !(*v > 0.0)) {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    stats::linear_fit(&lx, &ly).slope
}

pub(crate) fn boot<F: Fn(&[f64]) -> f64>(data: &[f64], f: F, reps: usize, seed: u64) -> Bootstrap {
    if data.len() < 2 {
        let v = if data.is_empty() { f64::NAN } else { f(data) };
        return Bootstrap { estimate: v, se: f64::NAN, ci_lo: f64::NAN, ci_hi: f64::NAN };
    }
    stats::bootstrap(data, f, reps, seed)
}

pub(crate) fn max_of(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}
