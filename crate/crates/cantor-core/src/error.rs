//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the exact-arithmetic toolkit.
///
/// The variants partition errors by who is at fault: `Domain`, `Range`,
/// `Constraint` and `Parse` indicate bad inputs; `Unsupported` and
/// `Resource` indicate a request outside the configured capabilities;
/// `ScheduleViolation` and `Internal` indicate broken invariants that should
/// be impossible when the gating conditions hold.
#[derive(Debug, Error)]
pub enum CantorError {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Index or window outside the available data.
    #[error("range error: {0}")]
    Range(String),

    /// The inputs are syntactically valid but mutually unsatisfiable.
    #[error("constraint error: {0}")]
    Constraint(String),

    /// The operation is not supported for these inputs.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The request exceeds a configured size budget.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A digit-envelope invariant failed; impossible when stage gating holds.
    #[error("schedule violation: {0}")]
    ScheduleViolation(String),

    /// Internal consistency failure.
    #[error("internal error: {0}")]
    Internal(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CantorError>;
