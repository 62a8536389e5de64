//! Chebyshev series on [-1, 1]: transforms, Clenshaw sums, and the
//! closed forms used for log and Cauchy kernels against `sqrt(1-v^2) U_{n-1}`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// First-kind Chebyshev nodes `cos(pi (k + 1/2) / m)`, descending.
pub fn nodes(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| (PI * (k as f64 + 0.5) / m as f64).cos())
        .collect()
}

/// Coefficients `a_n` of the degree `m-1` interpolant through the first-kind nodes.
pub fn coeffs_from_values(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let mut buf: Vec<Complex64> = Vec::with_capacity(2 * m);
    buf.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
    buf.extend(values.iter().rev().map(|&v| Complex64::new(v, 0.0)));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(2 * m).process(&mut buf);
    (0..m)
        .map(|n| {
            let ph = Complex64::from_polar(1.0, -PI * n as f64 / (2 * m) as f64);
            let c = 0.5 * (ph * buf[n]).re;
            if n == 0 {
                c / m as f64
            } else {
                2.0 * c / m as f64
            }
        })
        .collect()
}

/// Interpolates `f` on `m` first-kind nodes.
pub fn interpolate<F: Fn(f64) -> f64>(f: F, m: usize) -> Vec<f64> {
    let v: Vec<f64> = nodes(m).into_iter().map(f).collect();
    coeffs_from_values(&v)
}

/// Drops trailing coefficients below `tol * max|a|`.
pub fn chop(mut a: Vec<f64>, tol: f64) -> Vec<f64> {
    let big = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    while a.len() > 1 && a.last().is_some_and(|v| v.abs() <= tol * big) {
        a.pop();
    }
    a
}

/// `sum a_n T_n(x)`.
pub fn eval_t(a: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in a.iter().skip(1).rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    a.first().copied().unwrap_or(0.0) + x * b1 - b2
}

/// `sum_k c_k U_k(x)`.
pub fn eval_u(c: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &v in c.iter().rev() {
        let b0 = v + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    b1
}

/// Coefficients of the derivative of a T-series.
pub fn derivative(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * a[k];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

/// `sum_{n>=1} a_n U_{n-1}(v_k)` at the `m` first-kind nodes `v_k = cos(theta_k)`, using
/// `U_{n-1}(cos theta) = sin(n theta) / sin(theta)` and one FFT of length `2m`.
/// `a[0]` is the `n = 1` coefficient; terms with `n >= 2m` are ignored.
pub fn eval_u_at_nodes(a: &[f64], m: usize) -> Vec<f64> {
    let len = 2 * m;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (i, &c) in a.iter().enumerate() {
        let n = i + 1;
        if n >= len {
            break;
        }
        buf[n] = Complex64::from_polar(c, PI * n as f64 / len as f64);
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(len).process(&mut buf);
    (0..m)
        .map(|k| {
            let th = PI * (k as f64 + 0.5) / m as f64;
            buf[k].im / th.sin()
        })
        .collect()
}

/// Joukowski inverse `w` with `u = (w + 1/w)/2` and `|w| < 1` off the cut.
/// On the cut the upper-half-plane limit is returned.
pub fn joukowski_inv(u: Complex64) -> Complex64 {
    if u.im == 0.0 && u.re.abs() <= 1.0 {
        return Complex64::new(u.re, -(1.0 - u.re * u.re).max(0.0).sqrt());
    }
    let s = (u - 1.0).sqrt() * (u + 1.0).sqrt();
    let w1 = u - s;
    if w1.norm() <= 1.0 {
        w1
    } else {
        u + s
    }
}

/// Polynomial `sum_{n>=1} b_n w^n` in Horner form; `b[0]` is the `n = 1` coefficient.
pub fn power_sum(b: &[f64], w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in b.iter().rev() {
        acc = (acc + c) * w;
    }
    acc
}

/// `int log|u - v| sqrt(1-v^2) sum_n b_n U_{n-1}(v) dv` for real `u`,
/// with `b[0]` the `n = 1` coefficient.
pub fn log_integral(b: &[f64], u: f64) -> f64 {
    let inside = u.abs() <= 1.0;
    let (c_of, logw): (Box<dyn Fn(usize) -> f64>, f64) = if inside {
        (Box::new(move |k| t_n(k, u)), 0.0)
    } else {
        let w = u - u.signum() * (u * u - 1.0).sqrt();
        (Box::new(move |k| w.powi(k as i32)), w.abs().ln())
    };
    let b1 = b.first().copied().unwrap_or(0.0);
    let mut s = -0.5 * PI * b1 * (std::f64::consts::LN_2 + logw);
    for (i, &bn) in b.iter().enumerate() {
        let n = i + 1;
        let mut term = c_of(n + 1) / (n + 1) as f64;
        if n >= 2 {
            term = c_of(n - 1) / (n - 1) as f64 - term;
        } else {
            term = -term;
        }
        s -= 0.5 * PI * bn * term;
    }
    s
}

/// `int log|z - v| sqrt(1-v^2) sum_n b_n U_{n-1}(v) dv` for complex `z`: the real part of the
/// analytic continuation of the real-axis formula.
pub fn log_integral_complex(b: &[f64], z: Complex64) -> f64 {
    if z.im == 0.0 {
        return log_integral(b, z.re);
    }
    let w = joukowski_inv(z);
    let b1 = b.first().copied().unwrap_or(0.0);
    let mut s = -0.5 * PI * b1 * (std::f64::consts::LN_2 + w.norm().ln());
    let mut pw = vec![Complex64::new(1.0, 0.0)];
    for k in 0..=b.len() + 1 {
        pw.push(pw[k] * w);
    }
    for (i, &bn) in b.iter().enumerate() {
        let n = i + 1;
        let mut term = -pw[n + 1].re / (n + 1) as f64;
        if n >= 2 {
            term += pw[n - 1].re / (n - 1) as f64;
        }
        s -= 0.5 * PI * bn * term;
    }
    s
}

/// `T_n(u)` for `|u| <= 1`.
pub fn t_n(n: usize, u: f64) -> f64 {
    (n as f64 * u.clamp(-1.0, 1.0).acos()).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad;

    #[test]
    fn interpolation_recovers_polynomial() {
        let a = interpolate(|x| 3.0 * x * x - x + 0.5, 8);
        // 3x^2 = 1.5 T0 + 1.5 T2
        assert!((a[0] - 2.0).abs() < 1e-14);
        assert!((a[1] + 1.0).abs() < 1e-14);
        assert!((a[2] - 1.5).abs() < 1e-14);
        assert!(a[3..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn u_series_at_nodes_matches_clenshaw() {
        let a: Vec<f64> = (0..37).map(|k| ((k * 7 % 11) as f64 - 5.0) / (k + 1) as f64).collect();
        let m = 64;
        let fast = eval_u_at_nodes(&a, m);
        for (v, f) in nodes(m).into_iter().zip(fast) {
            assert!((eval_u(&a, v) - f).abs() < 1e-11, "{v}");
        }
    }

    #[test]
    fn clenshaw_matches_trig() {
        let a = [0.3, -0.2, 0.7, 0.1];
        let x: f64 = 0.37;
        let direct: f64 = a.iter().enumerate().map(|(n, c)| c * t_n(n, x)).sum();
        assert!((eval_t(&a, x) - direct).abs() < 1e-14);
        let th = x.acos();
        let u: f64 = (0..4).map(|k| a[k] * ((k as f64 + 1.0) * th).sin() / th.sin()).sum();
        assert!((eval_u(&a, x) - u).abs() < 1e-13);
    }

    #[test]
    fn derivative_of_series() {
        let a = interpolate(|x| x.powi(5) - 2.0 * x.powi(3), 12);
        let d = derivative(&a);
        let x: f64 = -0.41;
        let exact = 5.0 * x.powi(4) - 6.0 * x * x;
        assert!((eval_t(&d, x) - exact).abs() < 1e-12);
    }

    fn log_oracle(b: &[f64], u: f64) -> f64 {
        // independent: theta substitution, split at the singular angle
        let g = |th: f64| {
            let v = th.cos();
            let p: f64 = b.iter().enumerate().map(|(i, c)| c * ((i as f64 + 1.0) * th).sin()).sum();
            (u - v).abs().ln() * p * th.sin()
        };
        let mut br = vec![0.0, PI];
        if u.abs() < 1.0 {
            br = vec![0.0, u.acos(), PI];
        }
        quad::adaptive(g, &br, 1e-13, 1e-13).value
    }

    #[test]
    fn log_integral_matches_quadrature() {
        let b = [0.6, -0.1, 0.25, 0.05];
        for &u in &[-0.8, 0.0, 0.3, 0.99, 1.5, -3.0] {
            let got = log_integral(&b, u);
            let want = log_oracle(&b, u);
            assert!((got - want).abs() < 1e-9, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn complex_log_integral_matches_quadrature() {
        let b = [0.6, -0.1, 0.25, 0.05];
        for z in [Complex64::new(0.3, 0.2), Complex64::new(-1.4, 0.01), Complex64::new(2.0, -3.0)] {
            let f = |th: f64| {
                let v = th.cos();
                (z - v).norm().ln() * eval_u(&b, v) * th.sin() * th.sin()
            };
            let want = quad::adaptive(f, &[0.0, PI], 1e-13, 1e-13).value;
            assert!((log_integral_complex(&b, z) - want).abs() < 1e-9, "{z}");
        }
        assert_eq!(log_integral_complex(&b, Complex64::new(0.4, 0.0)), log_integral(&b, 0.4));
    }

    #[test]
    fn stieltjes_closed_form() {
        // int sqrt(1-v^2) U_{n-1}(v) / (z - v) dv = pi w^n
        let z = Complex64::new(0.4, 0.3);
        let w = joukowski_inv(z);
        for n in 1..4 {
            let f = |th: f64| -> Complex64 {
                let v = th.cos();
                (((n as f64) * th).sin() * th.sin()) / (z - v)
            };
            let re = quad::adaptive(|t| f(t).re, &[0.0, PI], 1e-13, 1e-13).value;
            let im = quad::adaptive(|t| f(t).im, &[0.0, PI], 1e-13, 1e-13).value;
            let want = PI * w.powi(n);
            assert!((re - want.re).abs() < 1e-10 && (im - want.im).abs() < 1e-10);
        }
    }
}
