//! Error types shared across the simulator.

use thiserror::Error;

/// Everything that can go wrong while mutating or querying a twin world.
///
/// Event application distinguishes *rejections* (precondition or policy
/// failures, recorded in the event log and skipped) from *fatal* errors
/// (invariant violations that signal a bug).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("twin for asset {asset} already exists in registry of {creator}")]
    DuplicateTwin { asset: String, creator: String },

    #[error("policy denied: {0}")]
    PolicyDenied(String),

    #[error("illegal status transition {from} -> {to}")]
    IllegalTransition { from: String, to: String },

    #[error("illegal lifecycle phase transition {from} -> {to}")]
    IllegalPhaseTransition { from: String, to: String },

    #[error("component {child} is already attached to {parent}")]
    AlreadyAttached { child: String, parent: String },

    #[error("component {child} is not attached to {parent}")]
    NotAttached { child: String, parent: String },

    #[error("mileage regression for {asset}: {km} km is below previous {previous} km")]
    MileageRegression {
        asset: String,
        km: u64,
        previous: u64,
    },

    #[error("role of {actor} does not permit issuing a {kind} certificate")]
    RoleMismatch { actor: String, kind: String },

    #[error("registry of {0} is unavailable")]
    RegistryUnavailable(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("unknown asset reference {0}")]
    UnknownAsset(String),

    #[error("unknown provider {0}")]
    UnknownProvider(String),

    #[error("unknown stakeholder {0}")]
    UnknownStakeholder(String),

    #[error("contract negotiation rejected: {0}")]
    NegotiationRejected(String),

    #[error("scenario parse error at line {line}: {reason}")]
    ParseError { line: usize, reason: String },

    #[error("scenario validation failed: {0}")]
    ValidationError(String),

    #[error("log set is incomplete: {0}")]
    IncompleteLog(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("world invariant violated: {0}")]
    InvariantViolation(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
