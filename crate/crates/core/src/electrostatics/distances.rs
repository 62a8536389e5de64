use serde::{Deserialize, Serialize};

use super::Background;
use crate::error::{Error, Result};

/// Truncation radii `eta_i`, one per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationVector {
    pub eta: Vec<f64>,
}

impl TruncationVector {
    pub fn scaled(&self, factor: f64) -> Self {
        TruncationVector { eta: self.eta.iter().map(|e| e * factor).collect() }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }
}

/// Window `Omega = [lo, hi]` with extension `Omega x [-height, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub height: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64, height: f64) -> Result<Self> {
        if !(hi > lo) || !(height > 0.0) {
            return Err(Error::invalid("window", format!("need hi > lo and height > 0, got [{lo}, {hi}] x {height}")));
        }
        Ok(Window { lo, hi, height })
    }

    /// Window of length `len` centered at `z` with height `len` (so `|Omega|` is in `[L, 2L]` for `L = len`).
    pub fn centered(z: f64, len: f64) -> Self {
        Window { lo: z - 0.5 * len, hi: z + 0.5 * len, height: len }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Same center, everything scaled by `factor`.
    pub fn dilated(&self, factor: f64) -> Self {
        let c = 0.5 * (self.lo + self.hi);
        let h = 0.5 * self.len() * factor;
        Window { lo: c - h, hi: c + h, height: self.height * factor }
    }
}

/// Checks that points are finite and strictly increasing.
pub fn validate_points(points: &[f64]) -> Result<()> {
    if let Some(i) = points.iter().position(|x| !x.is_finite()) {
        return Err(Error::invalid("points", format!("point {i} is not finite")));
    }
    for i in 1..points.len() {
        if points[i] == points[i - 1] {
            return Err(Error::CoincidentPoints { index: i - 1, next: i });
        }
        if points[i] < points[i - 1] {
            return Err(Error::invalid("points", "points must be sorted ascending"));
        }
    }
    Ok(())
}

/// `r_i = 1/4 min(min_{j != i} |x_i - x_j|, 1)` for sorted points.
pub fn minimal_distances(points: &[f64]) -> TruncationVector {
    let n = points.len();
    let eta = (0..n)
        .map(|i| {
            let mut d = 1.0f64;
            if i > 0 {
                d = d.min(points[i] - points[i - 1]);
            }
            if i + 1 < n {
                d = d.min(points[i + 1] - points[i]);
            }
            0.25 * d
        })
        .collect();
    TruncationVector { eta }
}

/// Minimal distances relative to a window: only neighbours inside the window count, and
/// points within 1/2 of its boundary get 1/4.
pub fn local_minimal_distances(points: &[f64], window: &Window) -> TruncationVector {
    let inside: Vec<f64> = points.iter().copied().filter(|x| window.contains(*x)).collect();
    let eta = points
        .iter()
        .map(|&x| {
            let boundary = (x - window.lo).abs().min((x - window.hi).abs());
            if boundary < 0.5 {
                return 0.25;
            }
            // nearest inside neighbours by binary search
            let k = inside.partition_point(|y| *y < x);
            let mut d = 1.0f64;
            for j in [k.wrapping_sub(1), k, k + 1] {
                if let Some(&y) = inside.get(j) {
                    if y != x {
                        d = d.min((y - x).abs());
                    }
                }
            }
            0.25 * d
        })
        .collect();
    TruncationVector { eta }
}

/// `f_eta(x) = (-log|x| + log eta)_+`; `+inf` at `x = 0`.
pub fn truncation_function(eta: f64, x: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    (eta.ln() - x.abs().ln()).max(0.0)
}

/// `int f_eta(x - x0) dmu(x)`, with the logarithmic endpoint singularity removed by `x = x0 +- eta s^2`.
pub fn truncation_mass(bg: &dyn Background, x0: f64, eta: f64) -> f64 {
    let g = |s: f64| {
        if s == 0.0 {
            return 0.0;
        }
        let w = -4.0 * eta * s * s.ln();
        w * (bg.density(x0 + eta * s * s) + bg.density(x0 - eta * s * s))
    };
    // density may have square-root edges inside the disk; adaptive handles the kinks
    crate::numerics::quad::adaptive(g, &[0.0, 0.5, 1.0], 1e-12, 1e-10).value
}

/// Discrepancy `#(X in [a, b]) - mu([a, b])`.
pub fn discrepancy(points: &[f64], bg: &dyn Background, interval: (f64, f64)) -> f64 {
    let (a, b) = interval;
    if !(b > a) {
        return 0.0;
    }
    let count = points.iter().filter(|x| **x >= a && **x <= b).count();
    count as f64 - bg.mass_between(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::Uniform;

    #[test]
    fn minimal_distance_examples() {
        assert_eq!(minimal_distances(&[0.0, 0.4, 3.0]).eta, vec![0.1, 0.1, 0.25]);
        assert_eq!(minimal_distances(&[0.0, 5.0]).eta, vec![0.25, 0.25]);
        assert_eq!(minimal_distances(&[1.0]).eta, vec![0.25]);
    }

    #[test]
    fn local_minimal_distance_examples() {
        let w = Window::new(0.0, 10.0, 1.0).unwrap();
        let r = local_minimal_distances(&[0.1, 5.0, 5.2], &w).eta;
        assert_eq!(r[0], 0.25);
        assert!((r[1] - 0.05).abs() < 1e-15 && (r[2] - 0.05).abs() < 1e-15);
        // neighbours outside the window are ignored
        let r = local_minimal_distances(&[4.0, 5.0, 11.0], &Window::new(0.0, 10.5, 1.0).unwrap()).eta;
        assert_eq!(r[1], 0.25);
    }

    #[test]
    fn shrinking_window_never_decreases_radii() {
        let pts: Vec<f64> = (0..40).map(|k| k as f64 * 0.37 + 0.05 * ((k * 7) % 5) as f64).collect();
        let big = Window::new(-1.0, 20.0, 1.0).unwrap();
        let small = Window::new(3.0, 9.0, 1.0).unwrap();
        let rb = local_minimal_distances(&pts, &big).eta;
        let rs = local_minimal_distances(&pts, &small).eta;
        for (i, x) in pts.iter().enumerate() {
            if small.contains(*x) {
                assert!(rs[i] >= rb[i]);
            }
        }
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(truncation_function(0.25, 0.5), 0.0);
        assert!((truncation_function(0.25, 0.1) - 2.5f64.ln()).abs() < 1e-15);
        assert_eq!(truncation_function(0.25, 0.25), 0.0);
        assert_eq!(truncation_function(0.25, 0.0), f64::INFINITY);
    }

    #[test]
    fn truncation_mass_of_flat_density() {
        // int_{-eta}^{eta} log(eta/|t|) dt = 2 eta
        let bg = Uniform { a: -5.0, b: 5.0, height: 0.7 };
        assert!((truncation_mass(&bg, 1.0, 0.2) - 0.7 * 0.4).abs() < 1e-12);
        // half outside the support
        assert!((truncation_mass(&bg, 5.0, 0.2) - 0.7 * 0.2).abs() < 1e-9);
    }

    #[test]
    fn discrepancy_examples() {
        let pts = [0.2, 0.5, 0.9];
        let unit = Uniform { a: 0.0, b: 1.0, height: 2.5 };
        assert!((discrepancy(&pts, &unit, (0.0, 1.0)) - 0.5).abs() < 1e-12);
        assert_eq!(discrepancy(&pts, &unit, (0.7, 0.7)), 0.0);
        let full = Uniform { a: 0.0, b: 1.0, height: 3.0 };
        assert!(discrepancy(&pts, &full, (f64::NEG_INFINITY, f64::INFINITY)).abs() < 1e-12);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(validate_points(&[0.0, 0.0, 1.0]), Err(Error::CoincidentPoints { index: 0, next: 1 })));
        assert!(validate_points(&[1.0, 0.0]).unwrap_err().is_validation());
    }
}
