use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a physical or structural invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scenario parse error: {0}")]
    Parse(String),

    /// The drift matrix has no asymptotically stable steady state.
    #[error("system is not stable (margin {margin:.3e})")]
    Unstable { margin: f64 },

    #[error("covariance blew up at t = {time:.6e}")]
    BlowUp { time: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("step size too large: halving changed the result by {relative_change:.3e}")]
    StepTooLarge { relative_change: f64 },

    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("symplectic eigenvalues do not pair up (mismatch {0:.3e})")]
    Pairing(f64),

    #[error("input samples are not periodic (endpoint mismatch {0:.3e})")]
    NotPeriodic(f64),

    #[error("probe is not adiabatic: linewidth/coupling ratio {0:.3} < 10")]
    NotAdiabatic(f64),

    #[error("mechanical covariance is not identifiable: {0}")]
    Unidentifiable(String),

    #[error("singular linear system")]
    Singular,
}
