use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Polynomial(Vec<f64>),
    Custom(Scalar),
}

/// Confining potential `V` with derivatives up to third order.
///
/// Polynomials carry exact derivatives; closures fall back to central differences.
#[derive(Clone)]
pub struct Potential {
    label: String,
    kind: Kind,
}

/// Serializable description of a polynomial potential, `V(x) = sum c_k x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub label: String,
    pub coefficients: Vec<f64>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Polynomial(c) => write!(f, "Potential({}, {:?})", self.label, c),
            Kind::Custom(_) => write!(f, "Potential({}, <closure>)", self.label),
        }
    }
}

impl Potential {
    /// `V(x) = x^2`, whose equilibrium measure is the semicircle on [-1, 1].
    pub fn quadratic() -> Self {
        Self::polynomial("x^2", vec![0.0, 0.0, 1.0])
    }

    pub fn polynomial(label: impl Into<String>, coefficients: Vec<f64>) -> Self {
        let mut c = coefficients;
        while c.len() > 1 && c.last() == Some(&0.0) {
            c.pop();
        }
        Potential { label: label.into(), kind: Kind::Polynomial(c) }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(label: impl Into<String>, f: F) -> Self {
        Potential { label: label.into(), kind: Kind::Custom(Arc::new(f)) }
    }

    pub fn from_spec(spec: &PotentialSpec) -> Self {
        Self::polynomial(spec.label.clone(), spec.coefficients.clone())
    }

    pub fn spec(&self) -> Option<PotentialSpec> {
        match &self.kind {
            Kind::Polynomial(c) => Some(PotentialSpec { label: self.label.clone(), coefficients: c.clone() }),
            Kind::Custom(_) => None,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coefficients(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Polynomial(c) => Some(c),
            Kind::Custom(_) => None,
        }
    }

    /// True when `V(x) = a x^2` for some `a > 0`.
    pub fn quadratic_coefficient(&self) -> Option<f64> {
        match self.coefficients()? {
            [c0, c1, c2] if *c0 == 0.0 && *c1 == 0.0 && *c2 > 0.0 => Some(*c2),
            _ => None,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.derivative(1, x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.derivative(2, x)
    }

    pub fn d3(&self, x: f64) -> f64 {
        self.derivative(3, x)
    }

    /// `k`-th derivative, `k <= 3`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial(c) => {
                let mut acc = 0.0;
                for (p, &ck) in c.iter().enumerate().skip(k).rev() {
                    let falling: f64 = (0..k).map(|j| (p - j) as f64).product();
                    acc = acc * x + ck * falling;
                }
                acc
            }
            Kind::Custom(f) => {
                let h = 1e-3 * (1.0 + x.abs());
                match k {
                    0 => f(x),
                    1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
                    2 => {
                        (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
                            / (12.0 * h * h)
                    }
                    _ => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
                }
            }
        }
    }

    /// Growth check: `V(x) - log|x|` strictly increasing along |x| in {10, 100, 1000} on both sides.
    pub fn check_growth(&self) -> Result<()> {
        for sign in [1.0, -1.0] {
            let g: Vec<f64> = [10.0f64, 100.0, 1000.0]
                .iter()
                .map(|r| self.value(sign * r) - r.ln())
                .collect();
            if !(g.iter().all(|v| v.is_finite()) && g[0] < g[1] && g[1] < g[2]) {
                return Err(Error::NonConfining { label: self.label.clone() });
            }
        }
        Ok(())
    }
}
