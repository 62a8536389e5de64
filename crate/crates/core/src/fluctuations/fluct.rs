use super::TestFunction;
use crate::equilibrium::EquilibriumMeasure;

/// `Fluct_N(xi) = sum xi(x_i) - N int xi dmu_V`.
pub fn fluct(points: &[f64], xi: &TestFunction, eq: &EquilibriumMeasure) -> f64 {
    FluctEvaluator::new(xi.clone(), eq).eval(points)
}

/// Fluctuation of one test function with `int xi dmu_V` computed once.
#[derive(Debug, Clone)]
pub struct FluctEvaluator {
    pub xi: TestFunction,
    /// `int xi dmu_V`.
    pub mean: f64,
}

impl FluctEvaluator {
    pub fn new(xi: TestFunction, eq: &EquilibriumMeasure) -> Self {
        let mean = eq.integrate(|x| xi.value(x), &xi.breaks(), 1e-13);
        FluctEvaluator { xi, mean }
    }

    pub fn eval(&self, points: &[f64]) -> f64 {
        let s: f64 = points.iter().map(|&x| self.xi.value(x)).sum();
        s - points.len() as f64 * self.mean
    }
}
