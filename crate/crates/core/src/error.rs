//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: left is {}x{}, right is {}x{}", lhs.0, lhs.1, rhs.0, rhs.1)]
    ShapeMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NonSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    #[error("matrix is not Hermitian: max |Q - Q*| = {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("node {node} is isolated (zero degree); normalization is undefined")]
    IsolatedNode { node: usize },

    #[error("class {class} has only {count} members; need at least 3 to stratify")]
    StratifyTooSmall { class: usize, count: usize },

    #[error("split infeasible: {0}")]
    SplitInfeasible(String),

    #[error("task requires negative edge weights but the graph has none")]
    NoNegativeEdges,

    #[error("empty index set")]
    EmptyIndexSet,

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("checkpoint mismatch in {layer}: expected {}x{}, found {}x{}", expected.0, expected.1, found.0, found.1)]
    CheckpointMismatch {
        layer: String,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("unknown property {0:?}")]
    UnknownProperty(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
