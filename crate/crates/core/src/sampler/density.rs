use super::Configuration;
use crate::equilibrium::Potential;
use crate::error::{Error, Result};

/// `H_N(X) = 1/2 sum_{i != j} -log|x_i - x_j| + N sum_i V(x_i)`; the order of points is irrelevant.
pub fn hamiltonian(points: &[f64], potential: &Potential) -> Result<f64> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    if let Some(i) = sorted.windows(2).position(|w| w[0] == w[1]) {
        return Err(Error::CoincidentPoints { index: i, next: i + 1 });
    }
    let n = sorted.len();
    let mut pair = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pair -= (sorted[j] - sorted[i]).ln();
        }
    }
    let conf: f64 = sorted.iter().map(|&x| potential.value(x)).sum();
    Ok(pair + n as f64 * conf)
}

/// `-beta H_N(X)`.
pub fn log_density_unnormalized(config: &Configuration, potential: &Potential) -> Result<f64> {
    Ok(-config.beta * hamiltonian(config.points(), potential)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Provenance;

    fn cfg(p: Vec<f64>, beta: f64) -> Configuration {
        let prov = Provenance { sampler: "hand".into(), seed: 0, steps: 0, acceptance_rate: None };
        Configuration::new(p, beta, prov).unwrap()
    }

    #[test]
    fn hand_examples() {
        let v = Potential::quadratic();
        assert!((log_density_unnormalized(&cfg(vec![0.0, 1.0], 1.0), &v).unwrap() + 2.0).abs() < 1e-14);
        let want = -(15.0 - 2f64.ln());
        assert!((log_density_unnormalized(&cfg(vec![0.0, 1.0, 2.0], 1.0), &v).unwrap() - want).abs() < 1e-13);
        assert!(matches!(hamiltonian(&[0.0, 0.0, 1.0], &v), Err(Error::CoincidentPoints { .. })));
    }

    #[test]
    fn order_does_not_matter() {
        let v = Potential::quadratic();
        let a = hamiltonian(&[0.3, -0.2, 0.9, 0.1], &v).unwrap();
        let b = hamiltonian(&[-0.2, 0.1, 0.3, 0.9], &v).unwrap();
        assert_eq!(a, b);
    }
}
