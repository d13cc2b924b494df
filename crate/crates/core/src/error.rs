use alloc::string::String;

use thiserror::Error;

use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("complex Schur iteration did not converge")]
    NoConvergence,
}

/// A transfer function was evaluated outside its half-plane of analyticity.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{name} is undefined at s = {s} (requires Re s > {abscissa})")]
pub struct DomainError {
    pub name: String,
    pub s: C64,
    pub abscissa: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown method `{0}` (expected radau1, radau2, radau3, gauss1 or gauss2)")]
    UnknownMethod(String),
    #[error("unknown impedance `{0}` (expected g1 or g2)")]
    UnknownImpedance(String),
    #[error("unknown problem `{0}`")]
    UnknownProblem(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("differentiation symbol requires |zeta| < 1, got |zeta| = {}", .0.norm())]
    ZetaOutOfDomain(C64),
    #[error("direct symbol path too close to zeta = 1 (|1 - zeta| = {0:e})")]
    ZetaNearOne(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("transfer evaluation failed at contour angle theta = {theta}: {source}")]
    ContourEvaluation { theta: f64, source: DomainError },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("step size or length mismatch: {0}")]
    Mismatch(String),
    #[error("weights b must be positive for the b-weighted inner product")]
    NonPositiveWeights,
    #[error(
        "method {method} has no coercivity constant c > 0 (Radau IIA with m >= 3 and Gauss with m >= 2 \
         violate Re(w, Delta(zeta) w) >= c delta |w|^2); only sigma = 0 is certified"
    )]
    OrderBarrier { method: String },
    #[error("{0}")]
    Unsupported(String),
    #[error("Newton iteration failed at step {step} after {iterations} iterations (residual {residual:e})")]
    NewtonFailed { step: usize, iterations: usize, residual: f64 },
    #[error("Newton Jacobian singular at step {step}")]
    SingularJacobian { step: usize },
    #[error("matrix {0} violates the required half-plane condition")]
    Precondition(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
