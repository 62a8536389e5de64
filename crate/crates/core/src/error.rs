use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("potential `{label}` is not confining: V(x) - log|x| is not increasing at large |x|")]
    NonConfining { label: String },
    #[error("{what} did not converge (residual {residual:.3e})")]
    NoConvergence { what: String, residual: f64 },
    #[error("one-cut ansatz fails: density or effective potential degenerates near x = {x:.6}")]
    MultiCutDetected { x: f64 },
    #[error("density is not a probability measure (mass {mass:.8}, min {min:.3e})")]
    NotAProbability { mass: f64, min: f64 },
    #[error("invalid beta {beta}: must be positive and finite")]
    InvalidBeta { beta: f64 },
    #[error("tridiagonal eigensolver failed to converge at index {index}")]
    EigensolverFailure { index: usize },
    #[error("sweeps ({sweeps}) smaller than burn-in ({burn_in})")]
    NotBurnedIn { sweeps: usize, burn_in: usize },
    #[error("points {index} and {next} coincide")]
    CoincidentPoints { index: usize, next: usize },
    #[error("background mass {got} does not match the number of points {expected}")]
    MassMismatch { expected: f64, got: f64 },
    #[error("truncation radius {eta} of point {index} exceeds its minimal distance {r}")]
    TruncationTooLarge { index: usize, eta: f64, r: f64 },
    #[error("untruncated field evaluated at charge {index}")]
    SingularEvaluation { index: usize },
    #[error("window height {height} is below the largest truncation radius {radius}")]
    WindowTooThin { height: f64, radius: f64 },
    #[error("window [{lo}, {hi}] leaves the blown-up bulk")]
    WindowOutsideBulk { lo: f64, hi: f64 },
    #[error("transport residual {residual:.3e} above tolerance {tolerance:.1e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),
    #[error("t * sup|psi'| = {value:.4} is not below 1/2")]
    TooLargeT { value: f64 },
    #[error("insufficient range for a decay fit: {0}")]
    InsufficientRange(String),
    #[error("Fourier spectrum does not decay (tail fraction {tail:.3e})")]
    NonDecayingSpectrum { tail: f64 },
    #[error("invalid argument `{key}`: {message}")]
    InvalidArgument { key: String, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        Error::InvalidArgument { key: key.to_string(), message: message.into() }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument { .. }
                | Error::InvalidBeta { .. }
                | Error::NotBurnedIn { .. }
                | Error::NonConfining { .. }
                | Error::WindowOutsideBulk { .. }
                | Error::Json(_)
        )
    }
}
