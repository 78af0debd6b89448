use thiserror::Error;

use crate::symplectic::SubspaceKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("model failed validation: {0}")]
    Validation(String),

    #[error("quadrature expansion is not self-adjoint: {0}")]
    SelfAdjointnessViolated(String),

    #[error("invalid quadrature term: {0}")]
    InvalidTerm(String),

    /// The even-dimension check on M or M' failed; usually a rank misjudgment upstream.
    #[error("parity violation: dim {space} = {dim} but d_c = {d_c}")]
    ParityViolation {
        space: &'static str,
        dim: usize,
        d_c: usize,
    },

    #[error("subspace is not {assumed:?}: witness pairing {pairing:e}")]
    AssumptionViolated {
        assumed: SubspaceKind,
        /// Offending vector in `[re, im]` pairs.
        witness: Vec<[f64; 2]>,
        pairing: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: error estimate {error:e} after {subdivisions} subdivisions")]
    QuadratureNotConverged { error: f64, subdivisions: usize },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
