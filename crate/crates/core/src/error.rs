use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown host `{0}`")]
    UnknownHost(String),
    #[error("unknown workflow `{0}`")]
    UnknownWorkflow(String),
    #[error("invalid scenario:\n{0}")]
    InvalidScenario(String),
    #[error("unsupported scenario schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("scenario has no workflows; the model would be degenerate")]
    NoWorkflows,
    #[error("oracle needs {count} free placement/controller variables but the limit is {limit}")]
    VarLimitExceeded { count: usize, limit: usize },
    #[error(
        "round-robin placement ran out of edge-server memory at workflow `{workflow}`, position {position}"
    )]
    CapacityExhausted { workflow: String, position: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("solutions belong to different scenarios")]
    ScenarioMismatch,
    #[error("assignment has {got} values but the model has {expected} variables")]
    MissingValues { expected: usize, got: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("solution is infeasible; run a feasibility check for details ({0})")]
    Infeasible(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
