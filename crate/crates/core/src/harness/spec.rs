use serde::{Deserialize, Serialize};

use crate::cache::Cache;
use crate::equilibrium::{Method, PotentialSpec};
use crate::error::{Error, Result};
use crate::sampler::McmcParams;

/// How a test-function scale depends on `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScaleRule {
    /// Fixed macroscopic length.
    Macroscopic { l: f64 },
    /// `L = N^{-alpha}`.
    Power { alpha: f64 },
}

impl ScaleRule {
    pub fn length(&self, n: usize) -> f64 {
        match *self {
            ScaleRule::Macroscopic { l } => l,
            ScaleRule::Power { alpha } => (n as f64).powf(-alpha),
        }
    }

    pub fn is_macroscopic(&self) -> bool {
        matches!(self, ScaleRule::Macroscopic { .. })
    }
}

/// Shape of the test functions `xi_{z,L}`; kernels use `h = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bump,
    Kappa,
    Zeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplerChoice {
    /// Beta-Hermite tridiagonal model; quadratic potentials only.
    Tridiagonal,
    Mcmc { params: McmcParams },
}

/// Pre-registered pass/fail thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Relative variance error.
    pub variance_rel: f64,
    /// Variance error in bootstrap standard errors.
    pub variance_sigma: f64,
    /// Mean error in bootstrap standard errors.
    pub mean_sigma: f64,
    /// Significance level of the normality tests.
    pub alpha: f64,
    /// Largest allowed `|slope|` of a log-log trend.
    pub slope_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { variance_rel: 0.1, variance_sigma: 3.0, mean_sigma: 3.0, alpha: 0.01, slope_max: 0.1 }
    }
}

/// Parameters shared by all experiments. Lengths in `scales` and `centers` are macroscopic;
/// `blown_up_scales` are window lengths `L'` in blown-up units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub potential: PotentialSpec,
    pub method: Method,
    pub grid_size: usize,
    pub betas: Vec<f64>,
    pub ns: Vec<usize>,
    pub sampler: SamplerChoice,
    pub replicas: usize,
    pub family: Family,
    pub scales: Vec<ScaleRule>,
    pub centers: Vec<f64>,
    pub blown_up_scales: Vec<f64>,
    /// Minimal scale `omega` in blown-up units.
    pub omega_min: f64,
    pub s_grid: Vec<f64>,
    /// Replicas used to calibrate `C_0` in the local-law experiment.
    pub calibration_replicas: usize,
    /// Configurations with a point outside the support dilated by this factor leave the good event.
    pub good_event_dilation: f64,
    /// Reference constant for counting local-law violations `(F + C_0 #)/|Omega| > bound`.
    pub local_law_bound: f64,
    /// Include `kappa`/`zeta` kernels at heights `L'` in the uniform-fluctuation experiment.
    pub include_kernels: bool,
    /// Compute the full-line energy per point in the local-law experiment.
    pub full_line: bool,
    pub bootstrap: usize,
    pub thresholds: Thresholds,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            potential: PotentialSpec { label: "x^2".into(), coefficients: vec![0.0, 0.0, 1.0] },
            method: Method::AnalyticOneCut,
            grid_size: 512,
            betas: vec![2.0],
            ns: vec![1024],
            sampler: SamplerChoice::Tridiagonal,
            replicas: 2000,
            family: Family::Bump,
            scales: vec![ScaleRule::Macroscopic { l: 0.5 }, ScaleRule::Power { alpha: 0.25 }, ScaleRule::Power { alpha: 0.5 }],
            centers: vec![0.0],
            blown_up_scales: vec![16.0, 32.0, 64.0, 128.0, 256.0],
            omega_min: 8.0,
            s_grid: (-8..=8).map(|k| k as f64 * 0.25).collect(),
            calibration_replicas: 50,
            good_event_dilation: 1.1,
            local_law_bound: 10.0,
            include_kernels: true,
            full_line: true,
            bootstrap: 1000,
            thresholds: Thresholds::default(),
            seed: 0,
        }
    }
}

impl ExperimentSpec {
    /// Checks ranges; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::invalid("betas", "empty list"));
        }
        for &beta in &self.betas {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidBeta { beta });
            }
        }
        if self.ns.is_empty() || self.ns.iter().any(|&n| n < 2) {
            return Err(Error::invalid("ns", "need at least one N, each N >= 2"));
        }
        if self.replicas < 2 {
            return Err(Error::invalid("replicas", "need at least two replicas"));
        }
        if self.grid_size < 256 {
            return Err(Error::invalid("grid_size", "must be at least 256"));
        }
        if self.potential.coefficients.is_empty() {
            return Err(Error::invalid("potential", "no coefficients"));
        }
        if !(self.omega_min > 0.0) {
            return Err(Error::invalid("omega_min", "must be positive"));
        }
        for rule in &self.scales {
            match *rule {
                ScaleRule::Macroscopic { l } if !(l > 0.0 && l.is_finite()) => {
                    return Err(Error::invalid("scales", format!("length {l} must be positive")));
                }
                ScaleRule::Power { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                    return Err(Error::invalid("scales", format!("exponent {alpha} must lie in (0, 1)")));
                }
                _ => {}
            }
            for &n in &self.ns {
                let l = rule.length(n);
                if !(l * n as f64 > self.omega_min) {
                    return Err(Error::invalid(
                        "scales",
                        format!("L N = {} at N = {n} is not above omega_min = {}", l * n as f64, self.omega_min),
                    ));
                }
            }
        }
        if let Some(l) = self.blown_up_scales.iter().find(|l| !(**l > self.omega_min)) {
            return Err(Error::invalid("blown_up_scales", format!("{l} is not above omega_min = {}", self.omega_min)));
        }
        if self.centers.iter().any(|z| !z.is_finite()) {
            return Err(Error::invalid("centers", "must be finite"));
        }
        if self.s_grid.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("s_grid", "must be finite"));
        }
        if !(self.good_event_dilation >= 1.0) {
            return Err(Error::invalid("good_event_dilation", "must be at least 1"));
        }
        if self.bootstrap < 10 {
            return Err(Error::invalid("bootstrap", "need at least 10 resamples"));
        }
        let t = &self.thresholds;
        if !(t.variance_rel > 0.0 && t.variance_sigma > 0.0 && t.mean_sigma > 0.0 && t.slope_max > 0.0)
            || !(t.alpha > 0.0 && t.alpha < 1.0)
        {
            return Err(Error::invalid("thresholds", "all thresholds must be positive, alpha in (0, 1)"));
        }
        if let SamplerChoice::Tridiagonal = self.sampler {
            let c = &self.potential.coefficients;
            let quadratic = c.len() == 3 && c[0] == 0.0 && c[1] == 0.0 && c[2] > 0.0;
            if !quadratic {
                return Err(Error::invalid("sampler", "the tridiagonal model needs V(x) = a x^2"));
            }
        }
        Ok(())
    }
}

/// Execution resources; never changes results.
#[derive(Debug, Clone)]
pub struct Context {
    pub workers: usize,
    pub cache: Option<Cache>,
}

impl Default for Context {
    fn default() -> Self {
        Context { workers: 1, cache: None }
    }
}
