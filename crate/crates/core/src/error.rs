use thiserror::Error;

/// Errors raised by the certification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{quantity} is only established for lambda in (0, 1), got {lambda}")]
    Domain { quantity: &'static str, lambda: f64 },

    #[error(
        "quadrature did not converge: error estimate {error:.3e} above tolerance {tol:.3e} after {intervals} subintervals"
    )]
    QuadratureNonConvergence {
        error: f64,
        tol: f64,
        intervals: usize,
    },

    #[error("norm certification did not reach gap {gap:.3e} (best gap {achieved:.3e}) within {evaluations} evaluations")]
    NormNonConvergence {
        gap: f64,
        achieved: f64,
        evaluations: usize,
    },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("sign-change isolation failed: found {0} sign changes")]
    TooManySignChanges(usize),

    #[error("no n <= {n_max} satisfies the tail condition for lambda = {lambda}")]
    SearchExhausted { lambda: f64, n_max: usize },

    #[error("cross-check failed: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, CertError>;
