use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::{Configuration, Provenance};
use crate::error::{Error, Result};
use crate::numerics::{eigen, rng};

/// Eigenvalues of the beta-Hermite tridiagonal model, rescaled to the Gibbs measure of `V(x) = x^2`.
///
/// The matrix with `N(0, 2)` diagonal and `chi_{beta k}` off-diagonal (`k = n-1, ..., 1`), all
/// divided by `sqrt 2`, has eigenvalue law `prod |l_i - l_j|^beta exp(-sum l_i^2 / 2)`;
/// `x = l / sqrt(2 beta n)` turns the weight into `exp(-beta n sum x_i^2)`.
pub fn sample_tridiagonal(n: usize, beta: f64, seed: u64) -> Result<Configuration> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidBeta { beta });
    }
    if n == 0 {
        return Err(Error::invalid("n", "need at least one point"));
    }
    let mut r = rng::stream(seed, 0);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    // N(0, 2) / sqrt 2
    let d: Vec<f64> = (0..n).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
    let mut e = Vec::with_capacity(n.saturating_sub(1));
    for k in (1..n).rev() {
        let chi2 = ChiSquared::new(beta * k as f64).map_err(|_| Error::InvalidBeta { beta })?;
        e.push(chi2.sample(&mut r).sqrt() * s2);
    }
    let lam = eigen::tridiagonal_eigenvalues(&d, &e)?;
    let scale = 1.0 / (2.0 * beta * n as f64).sqrt();
    let pts: Vec<f64> = lam.iter().map(|l| l * scale).collect();
    let prov = Provenance { sampler: "tridiagonal".into(), seed, steps: 1, acceptance_rate: None };
    Configuration::new(pts, beta, prov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::stats;

    #[test]
    fn single_point_variance() {
        // one point: weight exp(-beta x^2), variance 1 / (2 beta)
        let beta = 2.0;
        let xs: Vec<f64> = (0..100_000u64).map(|k| sample_tridiagonal(1, beta, k).unwrap().points()[0]).collect();
        let b = stats::bootstrap(&xs, stats::variance, 200, 1);
        assert!((b.estimate - 0.25).abs() < 3.0 * b.se, "{b:?}");
    }

    #[test]
    fn large_n_follows_semicircle() {
        let c = sample_tridiagonal(1024, 2.0, 11).unwrap();
        let cdf = |x: f64| {
            let x = x.clamp(-1.0, 1.0);
            0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / std::f64::consts::PI
        };
        let ks = stats::ks_one_sample(c.points(), cdf);
        assert!(ks.statistic < 0.02, "{ks:?}");
        assert!(c.points()[0] > -1.1 && c.points()[1023] < 1.1);
    }

    #[test]
    fn rejects_nonpositive_beta() {
        assert!(matches!(sample_tridiagonal(4, 0.0, 1), Err(Error::InvalidBeta { .. })));
    }

    #[test]
    fn reproducible() {
        assert_eq!(sample_tridiagonal(50, 1.0, 5).unwrap(), sample_tridiagonal(50, 1.0, 5).unwrap());
        assert_ne!(sample_tridiagonal(50, 1.0, 5).unwrap(), sample_tridiagonal(50, 1.0, 6).unwrap());
    }
}
