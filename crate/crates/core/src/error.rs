use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} is out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },

    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: usize, to: usize },

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("node {node} has no outgoing edge, so no admissible action exists")]
    NoAdmissibleAction { node: usize },

    #[error("{what} requires {needed} entries, exceeding the cap of {cap}")]
    CapacityExceeded {
        what: String,
        needed: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("totals differ beyond tolerance: {a} vs {b}")]
    TotalMismatch { a: f64, b: f64 },

    #[error("resource vector entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("target state is not reachable in one step: {certificate}")]
    NotReachable { certificate: String },

    #[error("transition matrix is not admissible: {reason}")]
    Inadmissible { reason: String },

    #[error("linear system is ill-posed: {0}")]
    IllPosed(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    Scenario(Vec<String>),

    #[error("safe-set flow is truncated at t = {t}; use the attacker-certificate commands instead")]
    TruncatedFlow { t: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
