use num_complex::Complex64;
use std::sync::Arc;

use crate::equilibrium::EquilibriumMeasure;
use crate::numerics::quad;

/// A neutralizing background measure on the real line.
pub trait Background: Send + Sync {
    fn mass(&self) -> f64;
    fn density(&self, x: f64) -> f64;
    /// Mass of `[a, b]`.
    fn mass_between(&self, a: f64, b: f64) -> f64;
    /// `h(x) = int -log|x - y| dmu(y)`.
    fn log_potential(&self, x: f64) -> f64;
    /// Planar extension `h(z) = int -log|z - y| dmu(y)`.
    fn log_potential_at(&self, z: Complex64) -> f64;
    /// `int dmu(y) / (z - y)`, upper-half-plane limit on the real axis.
    fn stieltjes(&self, z: Complex64) -> Complex64;
    /// `int int -log|x - y| dmu dmu`.
    fn log_energy(&self) -> f64;
    fn support(&self) -> Vec<(f64, f64)>;
    /// `int f dmu`, adaptive, splitting at `breaks`.
    fn integrate(&self, f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64;

    /// `int y dmu(y)`.
    fn first_moment(&self) -> f64 {
        let scale = self.mass().max(1.0);
        self.integrate(&|y| y, &[], 1e-12 * scale)
    }
}

/// Blown-up equilibrium measure `mu'(x) = mu_V((x - shift) / n)`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub eq: Arc<EquilibriumMeasure>,
    pub n: f64,
    pub shift: f64,
}

impl Scaled {
    pub fn new(eq: Arc<EquilibriumMeasure>, n: f64) -> Self {
        Scaled { eq, n, shift: 0.0 }
    }

    pub fn translated(&self, d: f64) -> Self {
        Scaled { eq: self.eq.clone(), n: self.n, shift: self.shift + d }
    }

    fn to_macro(&self, x: f64) -> f64 {
        (x - self.shift) / self.n
    }

    /// Blown-up bulk intervals.
    pub fn bulk(&self) -> Vec<(f64, f64)> {
        self.eq
            .bulk()
            .into_iter()
            .map(|(a, b)| (self.n * a + self.shift, self.n * b + self.shift))
            .collect()
    }
}

impl Background for Scaled {
    fn mass(&self) -> f64 {
        self.n * self.eq.mass()
    }

    fn density(&self, x: f64) -> f64 {
        self.eq.density(self.to_macro(x))
    }

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.n * (self.eq.cdf(self.to_macro(b)) - self.eq.cdf(self.to_macro(a)))
    }

    fn log_potential(&self, x: f64) -> f64 {
        self.n * (self.eq.log_potential(self.to_macro(x)) - self.n.ln() * self.eq.mass())
    }

    fn log_potential_at(&self, z: Complex64) -> f64 {
        self.n * (self.eq.log_potential_at((z - self.shift) / self.n) - self.n.ln() * self.eq.mass())
    }

    fn stieltjes(&self, z: Complex64) -> Complex64 {
        self.eq.stieltjes((z - self.shift) / self.n)
    }

    fn log_energy(&self) -> f64 {
        let m = self.eq.mass();
        self.n * self.n * (self.eq.log_energy - self.n.ln() * m * m)
    }

    fn support(&self) -> Vec<(f64, f64)> {
        self.eq
            .support()
            .into_iter()
            .map(|(a, b)| (self.n * a + self.shift, self.n * b + self.shift))
            .collect()
    }

    fn integrate(&self, f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
        let br: Vec<f64> = breaks.iter().map(|&x| self.to_macro(x)).collect();
        self.n * self.eq.integrate(|s| f(self.n * s + self.shift), &br, tol / self.n)
    }
}

/// Uniform density `height` on `[a, b]`.
#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    pub a: f64,
    pub b: f64,
    pub height: f64,
}

fn xlogx_minus_x(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.abs().ln() - t
    }
}

impl Background for Uniform {
    fn mass(&self) -> f64 {
        self.height * (self.b - self.a)
    }

    fn density(&self, x: f64) -> f64 {
        if x >= self.a && x <= self.b {
            self.height
        } else {
            0.0
        }
    }

    fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.height * (b.min(self.b) - a.max(self.a)).max(0.0)
    }

    fn log_potential(&self, x: f64) -> f64 {
        -self.height * (xlogx_minus_x(x - self.a) - xlogx_minus_x(x - self.b))
    }

    fn log_potential_at(&self, z: Complex64) -> f64 {
        if z.im == 0.0 {
            return self.log_potential(z.re);
        }
        let f = |t: Complex64| (t * t.ln() - t).re;
        -self.height * (f(z - self.a) - f(z - self.b))
    }

    fn stieltjes(&self, z: Complex64) -> Complex64 {
        ((z - self.a).ln() - (z - self.b).ln()) * self.height
    }

    fn log_energy(&self) -> f64 {
        let l = self.b - self.a;
        -self.height * self.height * (l * l * l.ln() - 1.5 * l * l)
    }

    fn support(&self) -> Vec<(f64, f64)> {
        vec![(self.a, self.b)]
    }

    fn integrate(&self, f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> f64 {
        let mut br = vec![self.a, self.b];
        br.extend(breaks.iter().copied().filter(|x| *x > self.a && *x < self.b));
        br.sort_by(|p, q| p.total_cmp(q));
        self.height * quad::adaptive(f, &br, tol, tol).value
    }
}
