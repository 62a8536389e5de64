use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use super::TestFunction;
use crate::error::{Error, Result};
use crate::numerics::quad;

/// `||xi||^2_{H^{1/2}} = (1/2 pi) int_{y>0} |grad xi~|^2 = (1/4 pi^2) int |lambda| |xi^(lambda)|^2`.
///
/// Compactly supported functions use a zero-padded DFT over eight times the support; the
/// field kernels use their exact transforms `|xi^| = 2 pi^2 e^{-h |lambda|}`.
pub fn h_half_norm_squared(xi: &TestFunction) -> Result<f64> {
    match xi {
        TestFunction::RescaledBump { z, l } => spectral(|x| xi.value(x), *z, 8.0 * *l, 1 << 14),
        TestFunction::Kappa { h, .. } | TestFunction::Zeta { h, .. } => {
            let h = *h;
            let f = |lam: f64| lam * 4.0 * PI.powi(4) * (-2.0 * h * lam).exp();
            let breaks = quad::geometric(1e-6 / h, 60.0 / h, 2.0);
            let mut br = vec![0.0];
            br.extend(breaks);
            Ok(2.0 * quad::adaptive(f, &br, 1e-14, 1e-13).value / (4.0 * PI * PI))
        }
        TestFunction::Polynomial { coefficients } => {
            if coefficients.iter().all(|c| *c == 0.0) {
                Ok(0.0)
            } else {
                Err(Error::NonDecayingSpectrum { tail: 1.0 })
            }
        }
    }
}

pub fn h_half_norm(xi: &TestFunction) -> Result<f64> {
    h_half_norm_squared(xi).map(f64::sqrt)
}

fn spectral(f: impl Fn(f64) -> f64, center: f64, half_span: f64, m: usize) -> Result<f64> {
    let dx = 2.0 * half_span / m as f64;
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| Complex64::new(f(center - half_span + (j as f64 + 0.5) * dx), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let dl = 2.0 * PI / (m as f64 * dx);
    let mut total = 0.0;
    let mut tail = 0.0;
    for (k, c) in buf.iter().enumerate() {
        let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
        let lam = kk * dl;
        let term = lam.abs() * (c.norm_sqr() * dx * dx) * dl;
        total += term;
        if kk.abs() > 0.45 * m as f64 {
            tail += term;
        }
    }
    if total > 0.0 && tail > 1e-8 * total {
        return Err(Error::NonDecayingSpectrum { tail: tail / total });
    }
    Ok(total / (4.0 * PI * PI))
}

/// Half-plane definition evaluated directly: `(1/2 pi) int_{y>0} |F'(z)|^2` with
/// `F'(z) = (1/pi) int xi'(t) / (t - z) dt`, in polar coordinates about the bump centre.
/// Only for compactly supported functions; used to validate the spectral constant.
pub fn h_half_norm_squared_half_plane(xi: &TestFunction) -> f64 {
    let (a, b) = xi.support().expect("half-plane oracle needs a compactly supported function");
    let z0 = 0.5 * (a + b);
    let l = 0.5 * (b - a);
    let dxi = |t: f64| xi.derivative(1, t);
    let fprime = |z: Complex64| -> Complex64 {
        // subtract the value at Re z to tame the near-singular kernel
        let x = z.re.clamp(a, b);
        let d0 = dxi(x);
        let mut br = vec![a, b];
        if x > a && x < b {
            br.insert(1, x);
        }
        let mut s = Complex64::new(0.0, 0.0);
        for w in br.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let span = hi - lo;
            let panels = quad::geometric(1e-9 * span, span, 2.0);
            let mut pts = vec![0.0];
            pts.extend(panels);
            for p in pts.windows(2) {
                // graded toward x from either side
                let (u0, u1) = (p[0], p[1]);
                let toward_lo = lo == x;
                s += gauss_c(
                    |u| {
                        let t = if toward_lo { lo + u } else { hi - u };
                        Complex64::new(dxi(t) - d0, 0.0) / (t - z)
                    },
                    u0,
                    u1,
                    12,
                );
            }
        }
        s += ((b - z) / (a - z)).ln() * d0;
        s / PI
    };
    let rule = quad::legendre(48);
    let mut total = 0.0;
    let radii = quad::geometric(1e-4 * l, 1e4 * l, 1.6);
    for (tp, wp) in rule.x.iter().zip(&rule.w) {
        let phi = 0.5 * PI * (1.0 + tp);
        let dir = Complex64::from_polar(1.0, phi);
        let radial = quad::gauss_panels(|rho| fprime(z0 + dir * rho).norm_sqr() * rho, &radii, 10);
        total += 0.5 * PI * wp * radial;
    }
    // |F'|^2 ~ c / rho^4 beyond the last radius: negligible at 1e4 L
    total / (2.0 * PI)
}

fn gauss_c(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let r = quad::legendre(n);
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in r.x.iter().zip(&r.w) {
        s += f(m + h * x) * *w;
    }
    s * h
}
