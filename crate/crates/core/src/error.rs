use thiserror::Error;

use crate::graph::Vertex;

pub type Result<T> = std::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("vertex {vertex} out of range (graph has {n} vertices)")]
    InvalidVertex { vertex: Vertex, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph is disconnected: vertex {unreachable} cannot be reached from vertex 0")]
    Disconnected { unreachable: Vertex },

    #[error("source and sink overlap at vertex {0}")]
    Overlap(Vertex),

    #[error("ball B({center}, {radius}) violates the host margin: {reason}")]
    Margin {
        center: Vertex,
        radius: u32,
        reason: String,
    },

    #[error("operator is singular: {0}")]
    Singular(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("no valid cells in the sweep grid: {0}")]
    EmptyGrid(String),

    #[error("need at least {needed} valid radii, found {found}")]
    InsufficientRadii { needed: usize, found: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl LabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}
