use crate::cubecat::{IndexSet, Partition};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("singular matrix")]
    Singular,
    #[error("linear part at {0} is singular")]
    NotInvertible(IndexSet),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("base-fiber mismatch: {0}")]
    FiberMismatch(String),
    #[error("incompatible input: {0}")]
    Incompatible(String),
    #[error("not natural at chart {chart}, point {point}, component {target} {blocks}")]
    NotNatural {
        chart: String,
        point: String,
        target: IndexSet,
        blocks: Partition,
    },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("semantic error: {0}")]
    Semantic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
