use thiserror::Error;

/// Failures raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("J_{nu}({x}) did not converge within {terms} terms")]
    NonConvergence { nu: f64, x: f64, terms: usize },

    #[error("partial-wave sum for alpha={alpha}, qr={x} not converged at |l|={l} (last term {last_term:e})")]
    TruncationFailure {
        alpha: f64,
        x: f64,
        l: usize,
        last_term: f64,
    },

    #[error("quadrature error estimate {err_est:e} exceeds tolerance {tol:e} after {subdivisions} subdivisions")]
    QuadratureFailure {
        err_est: f64,
        tol: f64,
        subdivisions: usize,
    },

    #[error("tabulated source: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
