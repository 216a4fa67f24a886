use thiserror::Error;

use crate::aig::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed AIGER header: {0}")]
    BadHeader(String),
    #[error("sequential AIGER not supported ({0} latches)")]
    Sequential(usize),
    #[error("literal {lit} exceeds declared maximum {max}")]
    LiteralOutOfRange { lit: u64, max: u64 },
    #[error("malformed AIGER body: {0}")]
    BadBody(String),
    #[error("truncated binary AND section")]
    Truncated,
    #[error("node {0} is not a live AND node")]
    NotAnAnd(NodeId),
    #[error("replacing node {old} with literal {new} would create a cycle")]
    Cycle { old: NodeId, new: u32 },
    #[error("truth table needs {0} variables, at most {max} supported", max = crate::cut::MAX_TT_VARS)]
    TooManyLeaves(usize),
    #[error("cannot factor a constant cover")]
    ConstantCover,
    #[error("pattern set drives {got} inputs, graph has {expected}")]
    InputCountMismatch { expected: usize, got: usize },
    #[error("graphs disagree on interface: {0}")]
    InterfaceMismatch(String),
    #[error("exhaustive check needs at most 16 inputs, graph has {0}")]
    TooManyInputs(usize),
    #[error("feature width {got}, model expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("bad model file: {0}")]
    BadModel(String),
    #[error("bad dataset: {0}")]
    BadDataset(String),
    #[error("relative difference against a zero baseline")]
    ZeroBaseline,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
