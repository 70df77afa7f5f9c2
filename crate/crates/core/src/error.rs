use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside the supported range (memory guards, orders).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// The diffusion coefficient is not bounded away from zero.
    #[error("coefficient not coercive: a = {value:e} at ({x}, {y})")]
    Coercivity { value: f64, x: f64, y: f64 },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("iterative solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Conjugate gradients met a direction of non-positive curvature.
    #[error("indefinite operator detected at iteration {iteration} (curvature {curvature:e})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    /// Zero (or negative) variance: standardization and expansions are undefined.
    #[error("degenerate distribution: variance {0:e}")]
    Degenerate(f64),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// `exp` overflowed while evaluating the log-normal coefficient.
    #[error("coefficient overflow: exponent {exponent:e}")]
    Overflow { exponent: f64 },

    #[error("empty sample set")]
    Empty,

    /// Failure of a single Monte Carlo sample.
    #[error("sample {index}: {source}")]
    Sample { index: usize, source: Box<Error> },
}
