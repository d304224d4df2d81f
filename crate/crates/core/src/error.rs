use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),

    #[error("degenerate template: no conductive nodes")]
    DegenerateTemplate,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numerical blow-up at iteration {iteration}, node {node}")]
    NumericalBlowup { iteration: u64, node: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("singular circuit: nodes {nodes:?} are not connected to ground or a driven source")]
    Topology { nodes: Vec<u64> },

    #[error("terminal selection failed: {0}")]
    TerminalSelection(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("incomplete recording: state {state} has no samples")]
    IncompleteRecording { state: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
