use thiserror::Error;

use crate::graph::VariableId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot place {requested} edges in a DAG over {n_nodes} nodes (max {max})")]
    InfeasibleEdgeCount {
        n_nodes: usize,
        requested: usize,
        max: usize,
    },
    #[error("edge generation stuck after {rejections} consecutive rejected candidates")]
    GenerationStuck { rejections: usize },
    #[error("graph contains a directed cycle")]
    CycleDetected,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid bayes net: {0}")]
    InvalidNet(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("evidence has zero probability")]
    ZeroProbabilityEvidence,
    #[error("joint enumeration over {0} variables is too large")]
    TooLarge(usize),
    #[error("{0} and {1} are adjacent; no separating set exists")]
    Adjacent(VariableId, VariableId),
    #[error("need {needed} eligible variables for a negative scaffold, only {available} available")]
    InsufficientVariables { needed: usize, available: usize },
    #[error("operation not supported by this backend: {0}")]
    UnsupportedOperation(&'static str),
    #[error("all {0} free-generation repetitions exceeded the step limit")]
    EstimationFailed(usize),
    #[error("malformed line {line}: {content:?}")]
    MalformedLine { line: usize, content: String },
    #[error("target header {header} does not match last record {last}")]
    TargetMismatch { header: String, last: String },
    #[error("remote model unavailable: {0}")]
    RemoteUnavailable(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("remote error {code}: {detail}")]
    Remote { code: String, detail: String },
    #[error("sinkhorn normalization did not converge in {0} iterations")]
    SinkhornNoConvergence(usize),
    #[error("q assigns zero probability where the risk has mass")]
    LogOfZero,
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("corpus manifest hash {expected} does not match net file hash {actual}")]
    HashMismatch { expected: String, actual: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
