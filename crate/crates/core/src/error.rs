use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({u}, {v}) references a node outside 0..{num_nodes}")]
    IndexOutOfRange {
        u: usize,
        v: usize,
        num_nodes: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dense operator requested for {n} nodes, above the cap of {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("edge homophily is undefined on a graph without edges")]
    EmptyEdgeSet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max |a_ij - a_ji| = {max_asymmetry:e})")]
    NonSymmetric { max_asymmetry: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (max off-diagonal {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("filter annihilates features (filtered spectral energy is zero)")]
    FilterAnnihilatesFeatures,

    #[error("graph is not regular (degrees range {min}..={max})")]
    IrregularGraph { min: usize, max: usize },

    #[error("class {0} is empty")]
    EmptyClass(usize),

    #[error("labels must be binary for this operation, found {0} classes")]
    NotBinary(usize),

    #[error("node mask is empty")]
    EmptyMask,

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("could not generate a {k}-regular graph on {n} nodes: {reason}")]
    Infeasible { n: usize, k: usize, reason: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
