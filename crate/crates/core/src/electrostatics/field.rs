use num_complex::Complex64;
use std::f64::consts::PI;

use super::distances::{local_minimal_distances, minimal_distances, truncation_mass, validate_points, TruncationVector, Window};
use super::energy::{check_mass, f_correction, EnergyBreakdown};
use super::Background;
use crate::error::{Error, Result};
use crate::numerics::quad;

/// Truncated field and potential of `sum delta^{(eta_i)}_{x_i} - mu` in the plane.
pub(crate) struct Field<'a> {
    pub pts: &'a [f64],
    pub eta: &'a [f64],
    pub bg: &'a dyn Background,
}

const NONE: usize = usize::MAX;

impl Field<'_> {
    /// `W = St_mu(z) - sum_j 1/(z - x_j)` over charges whose disk does not contain `z`;
    /// the field is `grad u = (Re W, -Im W)`.
    pub fn w(&self, z: Complex64, skip: usize) -> Complex64 {
        let mut s = self.bg.stieltjes(z);
        for (j, (&x, &e)) in self.pts.iter().zip(self.eta).enumerate() {
            if j == skip {
                continue;
            }
            let d = z - x;
            if d.norm_sqr() < e * e {
                continue;
            }
            s -= d.inv();
        }
        s
    }

    /// `u(z) = sum_j -log max(|z - x_j|, eta_j) - h^mu(z)`.
    pub fn potential(&self, z: Complex64) -> f64 {
        let mut s = -self.bg.log_potential_at(z);
        for (&x, &e) in self.pts.iter().zip(self.eta) {
            s -= (z - x).norm().max(e).ln();
        }
        s
    }

    /// `int |W|^2` over the cell `[cl, cr] x [0, hc]` in polar coordinates about charge `i`;
    /// the `1/rho^2` part outside the disk is integrated exactly.
    fn polar_cell(&self, i: usize, cl: f64, cr: f64, hc: f64, n: usize) -> f64 {
        let p = self.pts[i];
        let eta = self.eta[i];
        let (ar, al) = (cr - p, p - cl);
        let phi_r = hc.atan2(ar);
        let phi_l = PI - hc.atan2(al);
        let pieces: [(f64, f64, u8); 3] = [(0.0, phi_r, 0), (phi_r, phi_l, 1), (phi_l, PI, 2)];
        let rule = quad::legendre(n);
        let mut total = 0.0;
        for (a, b, side) in pieces {
            if b <= a {
                continue;
            }
            let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (t, wt) in rule.x.iter().zip(&rule.w) {
                let phi = m + h * t;
                let (c, s) = (phi.cos(), phi.sin());
                let rmax = match side {
                    0 => ar / c,
                    1 => hc / s,
                    _ => -al / c,
                };
                let dir = Complex64::new(c, s);
                let mut radial = 0.0;
                let inner = eta.min(rmax);
                if inner > 0.0 {
                    radial += quad::gauss(
                        |rho| {
                            let z = p + dir * rho;
                            self.w(z, i).norm_sqr() * rho
                        },
                        0.0,
                        inner,
                        n,
                    );
                }
                if rmax > eta {
                    radial += (rmax / eta).ln();
                    let breaks = quad::geometric(eta, rmax, 3.0);
                    radial += quad::gauss_panels(
                        |rho| {
                            let z = p + dir * rho;
                            let a = -(z - p).inv();
                            let r = self.w(z, i);
                            (2.0 * (a.conj() * r).re + r.norm_sqr()) * rho
                        },
                        &breaks,
                        n,
                    );
                }
                total += h * wt * radial;
            }
        }
        total
    }

    fn tensor(&self, x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> f64 {
        let rule = quad::legendre(n);
        let (mx, hx, my, hy) = (0.5 * (x0 + x1), 0.5 * (x1 - x0), 0.5 * (y0 + y1), 0.5 * (y1 - y0));
        let mut s = 0.0;
        for (tx, wx) in rule.x.iter().zip(&rule.w) {
            for (ty, wy) in rule.x.iter().zip(&rule.w) {
                let z = Complex64::new(mx + hx * tx, my + hy * ty);
                s += wx * wy * self.w(z, NONE).norm_sqr();
            }
        }
        s * hx * hy
    }

    /// Adaptive tensor Gauss on a rectangle, bisecting the longer side.
    fn rect(&self, x0: f64, x1: f64, y0: f64, y1: f64, n: usize, tol: f64) -> (f64, f64) {
        if !(x1 > x0 && y1 > y0) {
            return (0.0, 0.0);
        }
        let whole = self.tensor(x0, x1, y0, y1, n);
        self.rect_rec(x0, x1, y0, y1, whole, n, tol, 24)
    }

    #[allow(clippy::too_many_arguments)]
    fn rect_rec(&self, x0: f64, x1: f64, y0: f64, y1: f64, whole: f64, n: usize, tol: f64, depth: u32) -> (f64, f64) {
        let split_x = (x1 - x0) >= (y1 - y0);
        let (a, b) = if split_x {
            let xm = 0.5 * (x0 + x1);
            ((x0, xm, y0, y1), (xm, x1, y0, y1))
        } else {
            let ym = 0.5 * (y0 + y1);
            ((x0, x1, y0, ym), (x0, x1, ym, y1))
        };
        let va = self.tensor(a.0, a.1, a.2, a.3, n);
        let vb = self.tensor(b.0, b.1, b.2, b.3, n);
        let err = (va + vb - whole).abs();
        if err <= tol || depth == 0 {
            return (va + vb, err);
        }
        let (ra, ea) = self.rect_rec(a.0, a.1, a.2, a.3, va, n, 0.6 * tol, depth - 1);
        let (rb, eb) = self.rect_rec(b.0, b.1, b.2, b.3, vb, n, 0.6 * tol, depth - 1);
        (ra + rb, ea + eb)
    }

    /// `int |grad u_eta|^2` over `[x0, x1] x [0, y1]` (upper half only): polar cells around the
    /// charges inside, adaptive tensor panels elsewhere. Returns value and error estimate.
    fn upper_half(&self, x0: f64, x1: f64, y1: f64, n: usize, tol: f64) -> (f64, f64) {
        let idx: Vec<usize> = (0..self.pts.len()).filter(|&i| self.pts[i] > x0 && self.pts[i] < x1).collect();
        let mut cols = Vec::with_capacity(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            let x = self.pts[i];
            let left = if k > 0 { (0.5 * (x - self.pts[idx[k - 1]])).min(0.5) } else { 0.5 };
            let right = if k + 1 < idx.len() { (0.5 * (self.pts[idx[k + 1]] - x)).min(0.5) } else { 0.5 };
            let cl = (x - left).max(x0);
            let cr = (x + right).min(x1);
            let hc = (cr - cl).min(y1);
            cols.push((i, cl, cr, hc));
        }
        let ytop = cols.iter().map(|c| c.3).fold(0.0f64, f64::max).max(y1.min(1.0));
        let pieces = 2 * cols.len() + 4;
        let t = tol / pieces as f64;
        let mut val = 0.0;
        let mut err = 0.0;
        let mut add = |(v, e): (f64, f64)| {
            val += v;
            err += e;
        };
        for &(i, cl, cr, hc) in &cols {
            add((self.polar_cell(i, cl, cr, hc, n), 0.0));
            add(self.rect(cl, cr, hc, ytop, n, t));
        }
        // gaps between columns and the two sides, below ytop
        let mut edges = vec![x0];
        for &(_, cl, cr, _) in &cols {
            edges.push(cl);
            edges.push(cr);
        }
        edges.push(x1);
        for pair in edges.chunks(2) {
            add(self.rect(pair[0], pair[1], 0.0, ytop, n, t));
        }
        add(self.rect(x0, x1, ytop, y1, n, t));
        (val, err)
    }
}

/// Field `grad u_eta(x, y)`. Without a truncation vector the field is the untruncated one and
/// evaluating it at a charge is an error.
pub fn electric_field(
    points: &[f64],
    bg: &dyn Background,
    point: (f64, f64),
    truncation: Option<&TruncationVector>,
) -> Result<(f64, f64)> {
    let zeros = vec![0.0; points.len()];
    let eta = truncation.map_or(&zeros[..], |t| &t.eta[..]);
    let z = Complex64::new(point.0, point.1);
    for (i, (&x, &e)) in points.iter().zip(eta).enumerate() {
        if e == 0.0 && z == Complex64::new(x, 0.0) {
            return Err(Error::SingularEvaluation { index: i });
        }
    }
    let w = Field { pts: points, eta, bg }.w(z, NONE);
    Ok((w.re, -w.im))
}

/// Field form of the next-order energy:
/// `(int_{R^2} |grad u_eta|^2 - 2 pi sum g(eta_i)) / 4 pi - sum_i int f_{eta_i}(x - x_i) dmu`.
/// The plane integral runs over `[-R, R]^2` around the centre of the charges; the dipole
/// tail `(pi/2 + 1) p^2 / R^2` outside the box is reported as `tail_correction`.
pub fn renormalized_energy_field_form(
    points: &[f64],
    bg: &dyn Background,
    truncation: &TruncationVector,
    box_radius: f64,
) -> Result<EnergyBreakdown> {
    validate_points(points)?;
    check_mass(points, bg)?;
    let r = minimal_distances(points);
    for (i, (&e, &ri)) in truncation.eta.iter().zip(&r.eta).enumerate() {
        if e > ri * (1.0 + 1e-12) || !(e > 0.0) {
            return Err(Error::TruncationTooLarge { index: i, eta: e, r: ri });
        }
    }
    Ok(field_form_unchecked(points, bg, &truncation.eta, box_radius))
}

/// Field form for arbitrary positive radii; overlapping disks are allowed here.
fn field_form_unchecked(points: &[f64], bg: &dyn Background, eta: &[f64], box_radius: f64) -> EnergyBreakdown {
    let n = points.len();
    let (s_lo, s_hi) = bg
        .support()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(l, h)| (a.min(l), b.max(h)));
    let lo = points.first().copied().unwrap_or(0.0).min(s_lo);
    let hi = points.last().copied().unwrap_or(0.0).max(s_hi);
    let c = 0.5 * (lo + hi);
    let rr = box_radius.max(hi - c + 1.0);
    let tol = 1e-5 * (n as f64 + 1.0);
    // shift to the box centre
    let shifted: Vec<f64> = points.iter().map(|x| x - c).collect();
    let sbg = Shifted { inner: bg, d: c };
    let f2 = Field { pts: &shifted, eta, bg: &sbg };
    let (half, err) = f2.upper_half(-rr, rr, rr, 16, tol);
    let dipole = points.iter().sum::<f64>() - bg.first_moment();
    let tail = (0.5 * PI + 1.0) * dipole * dipole / (rr * rr);
    let self_sum: f64 = eta.iter().map(|e| -e.ln()).sum();
    let fc = f_correction(points, eta, bg, 0..n);
    EnergyBreakdown::field_form(2.0 * half, tail, self_sum, fc, n, (2.0 * err + tail) / (4.0 * PI))
}

/// Local energy `F^Omega` by two-dimensional quadrature of `|grad u_r~|^2` over
/// `Omega x [-L, L]`. `level` scales the node count (16 per direction at level 1).
pub fn local_energy(points: &[f64], bg: &dyn Background, window: &Window, level: usize) -> Result<EnergyBreakdown> {
    validate_points(points)?;
    let rt = local_minimal_distances(points, window);
    let (inside, rmax) = window_members(points, &rt, window);
    if window.height < rmax {
        return Err(Error::WindowTooThin { height: window.height, radius: rmax });
    }
    let field = Field { pts: points, eta: &rt.eta, bg };
    let n = 8 * (level.max(1) + 1);
    let tol = 1e-4 * window.len() / (level.max(1) as f64).powi(2);
    let (half, err) = field.upper_half(window.lo, window.hi, window.height, n, tol);
    Ok(local_breakdown(points, &rt, bg, &inside, 2.0 * half, 2.0 * err))
}

fn window_members(points: &[f64], rt: &TruncationVector, window: &Window) -> (Vec<usize>, f64) {
    let inside: Vec<usize> = (0..points.len()).filter(|&i| window.contains(points[i])).collect();
    let rmax = inside.iter().map(|&i| rt.eta[i]).fold(0.0, f64::max);
    (inside, rmax)
}

fn local_breakdown(
    points: &[f64],
    rt: &TruncationVector,
    bg: &dyn Background,
    inside: &[usize],
    field_integral: f64,
    err: f64,
) -> EnergyBreakdown {
    let self_sum: f64 = inside.iter().map(|&i| -rt.eta[i].ln()).sum();
    let fc = f_correction(points, &rt.eta, bg, inside.iter().copied());
    EnergyBreakdown::field_form(field_integral, 0.0, self_sum, fc, inside.len(), err / (4.0 * PI))
}

/// Local energy `F^Omega` through Green's identity on `Omega x [-L, L]`:
/// `int |grad u|^2 = oint u d_n u + 2 pi (sum_j int u d delta^{(r~_j)} - int_Omega u dmu)`.
/// Circle averages use the mean-value property, so only boundary and real-axis integrals remain.
pub fn local_energy_fast(points: &[f64], bg: &dyn Background, window: &Window) -> Result<EnergyBreakdown> {
    validate_points(points)?;
    let rt = local_minimal_distances(points, window);
    let (inside, rmax) = window_members(points, &rt, window);
    if window.height < rmax {
        return Err(Error::WindowTooThin { height: window.height, radius: rmax });
    }
    let field = Field { pts: points, eta: &rt.eta, bg };
    let (lo, hi, l) = (window.lo, window.hi, window.height);
    let tol = 1e-9 * (1.0 + window.len());

    // top side y = L, outward normal +y; d_y u = -Im W
    let panels = ((hi - lo) / (0.5 * l)).ceil().max(1.0) as usize;
    let top_breaks: Vec<f64> = (0..=panels).map(|k| lo + (hi - lo) * k as f64 / panels as f64).collect();
    let top = quad::gauss_panels(
        |x| {
            let z = Complex64::new(x, l);
            field.potential(z) * -field.w(z, NONE).im
        },
        &top_breaks,
        16,
    );
    let side = |x0: f64| {
        let mut br = vec![0.0, l];
        let d0 = points.iter().map(|p| (p - x0).abs()).fold(f64::INFINITY, f64::min).max(1e-6);
        let mut y = d0 / 8.0;
        while y < l {
            br.push(y);
            y *= 2.0;
        }
        for (&p, &e) in points.iter().zip(&rt.eta) {
            let d = (p - x0).abs();
            if d < e {
                br.push((e * e - d * d).sqrt());
            }
        }
        br.retain(|y| *y >= 0.0 && *y <= l);
        br.sort_by(|a, b| a.total_cmp(b));
        br.dedup();
        quad::adaptive(
            |y| {
                let z = Complex64::new(x0, y);
                field.potential(z) * field.w(z, NONE).re
            },
            &br,
            tol,
            1e-10,
        )
        .value
    };
    let boundary = 2.0 * (top + side(hi) - side(lo));

    // circle terms
    let mut circles = 0.0;
    for (j, (&xj, &ej)) in points.iter().zip(&rt.eta).enumerate() {
        if xj + ej < lo || xj - ej > hi {
            continue;
        }
        if xj - ej >= lo && xj + ej <= hi {
            let mut s = -ej.ln() - (bg.log_potential(xj) - truncation_mass(bg, xj, ej));
            for (k, (&xk, &ek)) in points.iter().zip(&rt.eta).enumerate() {
                if k == j {
                    continue;
                }
                let d = (xk - xj).abs();
                if d >= ej + ek {
                    s -= d.ln();
                } else {
                    s += quad::adaptive(
                        |th| -((Complex64::from_polar(ej, th) + xj - xk).norm().max(ek)).ln(),
                        &[0.0, 0.5 * PI, PI],
                        1e-12,
                        1e-12,
                    )
                    .value
                        / PI;
                }
            }
            circles += s;
        } else {
            // arc inside the window: theta in [0, pi] doubled by symmetry
            let mut br = vec![0.0, PI];
            for edge in [lo, hi] {
                let c = (edge - xj) / ej;
                if c.abs() < 1.0 {
                    br.push(c.acos());
                }
            }
            br.sort_by(|a, b| a.total_cmp(b));
            let mut s = 0.0;
            for w in br.windows(2) {
                let mid = xj + ej * (0.5 * (w[0] + w[1])).cos();
                if mid >= lo && mid <= hi {
                    s += quad::adaptive(|th| field.potential(Complex64::from_polar(ej, th) + xj), w, 1e-12, 1e-12).value;
                }
            }
            circles += s / PI;
        }
    }

    // real axis: int_Omega u(x, 0) dmu
    let mut axis = 0.0;
    for (&xk, &ek) in points.iter().zip(&rt.eta) {
        axis += restricted_log_potential(bg, xk, lo, hi) - truncation_mass_in(bg, xk, ek, lo, hi);
    }
    let npan = ((hi - lo) / 4.0).ceil().max(1.0) as usize;
    let br: Vec<f64> = (0..=npan).map(|k| lo + (hi - lo) * k as f64 / npan as f64).collect();
    axis -= quad::gauss_panels(|x| bg.log_potential(x) * bg.density(x), &br, 12);

    let integral = boundary + 2.0 * PI * (circles - axis);
    Ok(local_breakdown(points, &rt, bg, &inside, integral, 1e-6 * (1.0 + integral.abs())))
}

/// `int_{[lo, hi]} -log|x - x0| dmu(x)` with panels graded geometrically toward `x0`.
fn restricted_log_potential(bg: &dyn Background, x0: f64, lo: f64, hi: f64) -> f64 {
    let f = |x: f64| -(x - x0).abs().ln() * bg.density(x);
    let mut br = vec![lo, hi];
    if x0 > lo && x0 < hi {
        br.push(x0);
    }
    let near = if x0 < lo {
        lo - x0
    } else if x0 > hi {
        x0 - hi
    } else {
        0.0
    };
    // graded toward the singular point
    let scale = near.max(1e-3);
    let mut d = scale;
    while d < hi - lo {
        for p in [x0 - d, x0 + d] {
            if p > lo && p < hi {
                br.push(p);
            }
        }
        d *= 2.0;
    }
    br.sort_by(|a, b| a.total_cmp(b));
    br.dedup();
    let mut s = 0.0;
    for w in br.windows(2) {
        if w[0] == x0 || w[1] == x0 {
            // log endpoint singularity: x = x0 + (w - x0) t^2
            let (a, b) = if w[0] == x0 { (w[0], w[1]) } else { (w[1], w[0]) };
            let len = b - a;
            s += quad::gauss(
                |t: f64| {
                    let x = a + len * t * t;
                    -(len.abs() * t * t).ln() * bg.density(x) * 2.0 * len.abs() * t
                },
                0.0,
                1.0,
                16,
            );
        } else {
            s += quad::gauss(f, w[0], w[1], 12);
        }
    }
    s
}

/// `int_{[lo, hi]} f_eta(x - x0) dmu(x)`.
fn truncation_mass_in(bg: &dyn Background, x0: f64, eta: f64, lo: f64, hi: f64) -> f64 {
    if x0 + eta <= lo || x0 - eta >= hi {
        return 0.0;
    }
    if x0 - eta >= lo && x0 + eta <= hi {
        return truncation_mass(bg, x0, eta);
    }
    let g = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let w = -4.0 * eta * s * s.ln();
        let mut acc = 0.0;
        for x in [x0 + eta * s * s, x0 - eta * s * s] {
            if x >= lo && x <= hi {
                acc += bg.density(x);
            }
        }
        w * acc
    };
    let mut br = vec![0.0, 1.0];
    for edge in [lo, hi] {
        let d = (edge - x0).abs();
        if d < eta {
            br.push((d / eta).sqrt());
        }
    }
    br.sort_by(|a, b| a.total_cmp(b));
    quad::adaptive(g, &br, 1e-12, 1e-10).value
}

/// Background translated by `-d`.
struct Shifted<'a> {
    inner: &'a dyn Background,
    d: f64,
}

impl Background for Shifted<'_> {
    fn mass(&self) -> f64 {
        self.inner.mass()
    }
    fn density(&self, x: f64) -> f64 {
        self.inner.density(x + self.d)
    }
    fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.inner.mass_between(a + self.d, b + self.d)
    }
    fn log_potential(&self, x: f64) -> f64 {
        self.inner.log_potential(x + self.d)
    }
    fn log_potential_at(&self, z: Complex64) -> f64 {
        self.inner.log_potential_at(z + self.d)
    }
    fn stieltjes(&self, z: Complex64) -> Complex64 {
        self.inner.stieltjes(z + self.d)
    }
    fn log_energy(&self) -> f64 {
        self.inner.log_energy()
    }
    fn support(&self) -> Vec<(f64, f64)> {
        self.inner.support().into_iter().map(|(a, b)| (a - self.d, b - self.d)).collect()
    }
    fn integrate(&self, f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
        let br: Vec<f64> = breaks.iter().map(|x| x + self.d).collect();
        self.inner.integrate(&|x| f(x - self.d), &br, tol)
    }
}
