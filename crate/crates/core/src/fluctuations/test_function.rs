use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Test functions for linear statistics.
///
/// `RescaledBump` is `theta((x - z) / L)` with `theta(s) = exp(1 - 1/(1 - s^2))` on `(-1, 1)`,
/// so `theta(0) = 1`. `Kappa` and `Zeta` are the field kernels
/// `kappa_{a,h}(x) = 2 pi (x - a) / ((a - x)^2 + h^2)` and `zeta_{a,h}(x) = -2 pi h / ((a - x)^2 + h^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    RescaledBump { z: f64, l: f64 },
    Kappa { a: f64, h: f64 },
    Zeta { a: f64, h: f64 },
    Polynomial { coefficients: Vec<f64> },
}

/// `k`-th derivative of `q(s) = 1 - 1/(1 - s^2)`.
fn q_deriv(k: usize, s: f64) -> f64 {
    let fact = (1..=k).product::<usize>() as f64;
    let base = 0.5 * ((1.0 - s).powi(-(k as i32) - 1) + if k % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + s).powi(-(k as i32) - 1));
    if k == 0 {
        1.0 - base
    } else {
        -fact * base
    }
}

/// `theta^{(k)}(s)` for `k <= 4` via Faa di Bruno on `exp(q)`.
pub fn bump_derivative(k: usize, s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let q0 = q_deriv(0, s);
    // exp underflows long before the polynomial factors matter
    if q0 < -700.0 {
        return 0.0;
    }
    let th = q0.exp();
    let [q1, q2, q3, q4] = [1, 2, 3, 4].map(|j| if j <= k { q_deriv(j, s) } else { 0.0 });
    th * match k {
        0 => 1.0,
        1 => q1,
        2 => q2 + q1 * q1,
        3 => q3 + 3.0 * q1 * q2 + q1.powi(3),
        4 => q4 + 4.0 * q1 * q3 + 3.0 * q2 * q2 + 6.0 * q1 * q1 * q2 + q1.powi(4),
        _ => panic!("bump derivatives are implemented up to order 4"),
    }
}

/// `||theta||_{C^k} = max_{j <= k} sup |theta^{(j)}|` for the default bump, `k <= 4`.
pub fn bump_ck_norm(k: usize) -> f64 {
    static NORMS: OnceLock<[f64; 5]> = OnceLock::new();
    let norms = NORMS.get_or_init(|| {
        let mut sup = [0.0f64; 5];
        let m = 20_000;
        for i in 1..m {
            let s = -1.0 + 2.0 * i as f64 / m as f64;
            for (j, v) in sup.iter_mut().enumerate() {
                *v = v.max(bump_derivative(j, s).abs());
            }
        }
        let mut out = [0.0; 5];
        let mut run = 0.0f64;
        for j in 0..5 {
            run = run.max(sup[j]);
            out[j] = run;
        }
        out
    });
    norms[k.min(4)]
}

impl TestFunction {
    pub fn bump(z: f64, l: f64) -> Self {
        TestFunction::RescaledBump { z, l }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }

    /// `k`-th derivative, `k <= 4`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        match self {
            TestFunction::RescaledBump { z, l } => bump_derivative(k, (x - z) / l) / l.powi(k as i32),
            TestFunction::Kappa { a, h } => 2.0 * PI * resolvent_derivative(k, x - a, *h).re,
            TestFunction::Zeta { a, h } => -2.0 * PI * resolvent_derivative(k, x - a, *h).im,
            TestFunction::Polynomial { coefficients } => horner_derivative(coefficients, k, x),
        }
    }

    /// Compact support, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            TestFunction::RescaledBump { z, l } => Some((z - l, z + l)),
            _ => None,
        }
    }

    /// Points where quadrature should split: support ends or the kernel centre.
    pub fn breaks(&self) -> Vec<f64> {
        match self {
            TestFunction::RescaledBump { z, l } => vec![z - l, *z, z + l],
            TestFunction::Kappa { a, .. } | TestFunction::Zeta { a, .. } => vec![*a],
            TestFunction::Polynomial { .. } => vec![],
        }
    }

    /// Natural length scale: `L` for bumps, `h` for kernels, 1 for polynomials.
    pub fn scale(&self) -> f64 {
        match self {
            TestFunction::RescaledBump { l, .. } => *l,
            TestFunction::Kappa { h, .. } | TestFunction::Zeta { h, .. } => *h,
            TestFunction::Polynomial { .. } => 1.0,
        }
    }

    /// Smoothness class; `None` means `C^infinity`.
    pub fn smoothness(&self) -> Option<u32> {
        None
    }

    /// Stable string used in cache keys.
    pub fn descriptor(&self) -> String {
        match self {
            TestFunction::RescaledBump { z, l } => format!("bump(z={z},L={l})"),
            TestFunction::Kappa { a, h } => format!("kappa(a={a},h={h})"),
            TestFunction::Zeta { a, h } => format!("zeta(a={a},h={h})"),
            TestFunction::Polynomial { coefficients } => format!("poly{coefficients:?}"),
        }
    }

    /// Identically zero.
    pub fn is_zero(&self) -> bool {
        matches!(self, TestFunction::Polynomial { coefficients } if coefficients.iter().all(|c| *c == 0.0))
    }
}

/// `d^k/dt^k 1/(t - i h) = (-1)^k k! / (t - i h)^{k+1}`.
fn resolvent_derivative(k: usize, t: f64, h: f64) -> Complex64 {
    let fact = (1..=k).product::<usize>() as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(t, -h).powi(-(k as i32) - 1) * (sign * fact)
}

fn horner_derivative(c: &[f64], k: usize, x: f64) -> f64 {
    let mut s = 0.0;
    for j in (k..c.len()).rev() {
        let falling: f64 = (j + 1 - k..=j).map(|m| m as f64).product();
        s = s * x + c[j] * falling;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(f: &TestFunction, k: usize, x: f64) -> f64 {
        let h = 1e-4 * f.scale();
        (f.derivative(k - 1, x + h) - f.derivative(k - 1, x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_differences() {
        let fs = [
            TestFunction::bump(0.1, 0.3),
            TestFunction::Kappa { a: 0.2, h: 0.5 },
            TestFunction::Zeta { a: -0.4, h: 0.7 },
            TestFunction::Polynomial { coefficients: vec![1.0, -2.0, 0.5, 3.0, -1.0] },
        ];
        for f in &fs {
            for k in 1..=4 {
                for x in [-0.05, 0.17, 0.3] {
                    let (a, b) = (f.derivative(k, x), fd(f, k, x));
                    assert!((a - b).abs() < 1e-5 * (1.0 + b.abs()), "{f:?} k={k} x={x}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn kernel_values() {
        let k = TestFunction::Kappa { a: 1.0, h: 2.0 };
        assert!((k.value(0.0) - 2.0 * PI * -1.0 / 5.0).abs() < 1e-14);
        let z = TestFunction::Zeta { a: 1.0, h: 2.0 };
        assert!((z.value(0.0) + 2.0 * PI * 2.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn bump_shape() {
        let b = TestFunction::bump(2.0, 0.5);
        assert_eq!(b.value(2.0), 1.0);
        assert_eq!(b.value(2.5), 0.0);
        assert_eq!(b.value(1.4), 0.0);
        assert_eq!(b.support(), Some((1.5, 2.5)));
        assert!(bump_ck_norm(0) == 1.0 && bump_ck_norm(3) > bump_ck_norm(1));
    }

    #[test]
    fn serde_round_trip() {
        let f = TestFunction::Zeta { a: 0.5, h: 0.1 };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"kind":"zeta","a":0.5,"h":0.1}"#);
        assert_eq!(serde_json::from_str::<TestFunction>(&s).unwrap(), f);
        assert!(serde_json::from_str::<TestFunction>(r#"{"kind":"zeta","a":0.5,"h":0.1,"q":1}"#).is_err());
    }
}
