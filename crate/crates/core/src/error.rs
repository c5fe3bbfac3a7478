use thiserror::Error;

/// Errors raised by the solvers.
///
/// `Domain` and `Precondition` are caller mistakes; the remaining variants
/// signal numerical situations the model theory says should not happen or
/// that fall outside the detected range of a numerically located curve.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BegError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("root bracket failure: {0}")]
    Bracket(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("type classification failed at z = {z}: even derivatives up to order 6 are not positive")]
    Classification { z: f64 },

    #[error("convexity curve C(u) is undefined at u = {u}")]
    CurveUndefined { u: f64 },

    #[error("no first-order branch at u = {u}: {reason}")]
    NotFirstOrder { u: f64, reason: String },

    #[error("scan found {count} tied global minima; at most 3 are expected")]
    TooManyMinima { count: usize },

    #[error("conditioning window [{lo}, {hi}] carries no probability mass")]
    EmptyWindow { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, BegError>;

pub(crate) fn domain(msg: impl Into<String>) -> BegError {
    BegError::Domain(msg.into())
}

pub(crate) fn precondition(msg: impl Into<String>) -> BegError {
    BegError::Precondition(msg.into())
}
