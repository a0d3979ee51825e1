use thiserror::Error;

use crate::model::ValidationReport;

/// Errors raised by network construction, loading and inference.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    Validation(ValidationReport),

    #[error("malformed table: {0}")]
    Shape(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("topology mismatch: {algorithm} requires a {required}; {found}")]
    TopologyMismatch {
        algorithm: &'static str,
        required: &'static str,
        found: String,
    },

    #[error("network is disconnected")]
    Disconnected,

    #[error("impossible evidence: {0}")]
    ImpossibleEvidence(String),

    #[error("invalid evidence: {0}")]
    InvalidEvidence(String),

    #[error("intractable: {0}")]
    Intractable(String),

    #[error("round limit of {limit} exceeded")]
    RoundLimit { limit: usize },

    #[error("write conflict in round {round}: cell {target} written by processors {writers:?}")]
    WriteConflict {
        round: usize,
        target: usize,
        writers: Vec<usize>,
    },

    #[error("successor links contain a cycle")]
    Cycle,

    #[error("missing marginals: {0}")]
    MissingMarginals(String),

    #[error("variable sets differ: {0}")]
    MismatchedVariables(String),

    #[error("graph is not chordal: {0}")]
    NotChordal(String),

    #[error("elimination ordering incompatible with the network: {0}")]
    IncompatibleOrdering(String),

    #[error("variable {variable} would need {count} conditioners (cap {cap})")]
    ConditionerCap {
        variable: usize,
        count: usize,
        cap: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
