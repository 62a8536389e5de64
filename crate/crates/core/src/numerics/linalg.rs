//! Toeplitz products by FFT, conjugate gradients, and small dense solves.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Symmetric Toeplitz matrix `T[i][j] = col[|i - j|]` applied through a circulant embedding.
pub struct Toeplitz {
    n: usize,
    spectrum: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Toeplitz {
    pub fn new(col: &[f64]) -> Self {
        let n = col.len();
        let m = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..n {
            c[i].re = col[i];
            if i > 0 {
                c[m - i].re = col[i];
            }
        }
        fwd.process(&mut c);
        Toeplitz { n, spectrum: c, fwd, inv }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.spectrum.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (b, v) in buf.iter_mut().zip(x) {
            b.re = *v;
        }
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        buf[..self.n].iter().map(|c| c.re / m as f64).collect()
    }
}

/// Conjugate gradients for a symmetric positive definite operator.
/// Returns the solution and the final relative residual.
pub fn cg<F: Fn(&[f64]) -> Vec<f64>>(op: F, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let bn = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let mut rr = dot(&r, &r);
    for _ in 0..max_iter {
        if rr.sqrt() <= tol * bn {
            break;
        }
        let ap = op(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    (x, rr.sqrt() / bn)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `a` is row-major `n x n`.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k].abs() < 1e-300 {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_matches_dense_product() {
        let col = [4.0, 1.0, 0.5, 0.25, 0.1];
        let t = Toeplitz::new(&col);
        let x = [1.0, -2.0, 0.5, 3.0, 1.5];
        let y = t.apply(&x);
        for i in 0..5 {
            let want: f64 = (0..5).map(|j| col[(i as isize - j as isize).unsigned_abs()] * x[j]).sum();
            assert!((y[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_and_dense_agree() {
        let col = [4.0, 1.0, 0.5, 0.25];
        let t = Toeplitz::new(&col);
        let b = [1.0, 2.0, 3.0, 4.0];
        let (x, res) = cg(|v| t.apply(v), &b, 1e-14, 100);
        assert!(res < 1e-12);
        let a: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| col[(i as isize - j as isize).unsigned_abs()]).collect())
            .collect();
        let y = solve_dense(a, b.to_vec()).unwrap();
        for i in 0..4 {
            assert!((x[i] - y[i]).abs() < 1e-10);
        }
    }
}
