use thiserror::Error;

use crate::fields::expr::ExprError;
use crate::jets::JetError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("degenerate {what}: {value:e}")]
    Degenerate { what: &'static str, value: f64 },
    #[error("chart mismatch: expected dimension {expected}, got {got}")]
    ChartMismatch { expected: usize, got: usize },
    #[error("insufficient jet order: need {need}, have {have}")]
    InsufficientOrder { need: usize, have: usize },
    #[error("form is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),
    #[error("variance mismatch: {0}")]
    Variance(String),
    #[error("vector field is not projective (residual {0:e})")]
    NotProjective(f64),
    #[error("vector field is not Killing (residual {0:e})")]
    NotKilling(f64),
    #[error("guard violated: {0}")]
    Guard(String),
    #[error("guard exhaustion: found {found} of {wanted} valid samples in {attempts} attempts")]
    GuardExhausted {
        found: usize,
        wanted: usize,
        attempts: usize,
    },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no positive real root of the implicit relation")]
    NoRoot,
    #[error("branch collision: roots {0:e} apart along the continuation path")]
    BranchCollision(f64),
    #[error("closedness violated: {0:e}")]
    NotClosed(f64),
    #[error("wrong dimension or signature: {0}")]
    Signature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
