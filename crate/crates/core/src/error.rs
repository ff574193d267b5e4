use thiserror::Error;

/// Errors produced by graph ingestion, diffusion, matching, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected two whitespace-separated labels, got {found:?}")]
    MalformedLine { line: usize, found: String },

    #[error("edge list contains no edges")]
    EmptyEdgeList,

    #[error("line {line}: unknown node label {label:?}")]
    UnknownLabel { line: usize, label: String },

    #[error("line {line}: {side} label {label:?} appears in more than one correspondence")]
    DuplicateCorrespondence {
        line: usize,
        side: &'static str,
        label: String,
    },

    #[error("node index {index} out of range for graph with {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },

    #[error("perturbation ratio {ratio} outside [0, 1)")]
    InvalidRatio { ratio: f64 },

    #[error(
        "could not remove {requested} edges without isolating a node \
         (removed {removed} before exhausting attempts)"
    )]
    PerturbationInfeasible { requested: usize, removed: usize },

    #[error("node {node} is isolated; diffusion operators require minimum degree 1")]
    IsolatedNode { node: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value produced at diffusion step {step}")]
    NonFinite { step: usize },

    #[error("anchored initialization requires a non-empty anchor set")]
    EmptyAnchorSet,

    #[error("no one-to-one matching of size {requested} exists (best achievable: {achieved})")]
    MatchingInfeasible { requested: usize, achieved: usize },

    #[error("brute-force matcher limited to 10x10 instances, got {rows}x{cols}")]
    BruteForceTooLarge { rows: usize, cols: usize },

    #[error("ground truth is empty")]
    EmptyGroundTruth,

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
