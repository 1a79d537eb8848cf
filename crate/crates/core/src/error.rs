use thiserror::Error;

use crate::pc_matrix::Violation;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group mismatch: {0} vs {1}")]
    GroupMismatch(String, String),

    #[error("invalid element for group {group}: {reason}")]
    InvalidElement { group: String, reason: String },

    #[error("unknown group tag {0:?}")]
    UnknownGroup(String),

    #[error("coordinate vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("log branch singularity")]
    LogBranchSingularity,

    #[error("no normalized Haar measure on group {0}")]
    NoHaarMeasure(String),

    #[error("invalid PC matrix: {}", format_violations(.0))]
    InvalidMatrix(Vec<Violation>),

    #[error("consistency undefined with gaps")]
    GapsPresent,

    #[error("gap on triad ({0}, {1}, {2})")]
    GapOnTriad(usize, usize, usize),

    #[error("not an indicator map: In(1_G) = {0}")]
    NotIndicatorMap(f64),

    #[error("no gauge vector exists: triad {0:?} is inconsistent")]
    NoGaugeVector((usize, usize, usize)),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-positive input {0}")]
    NonPositive(f64),

    #[error("{0} requires group rplus")]
    RequiresRPlus(&'static str),

    #[error("{0} requires an abelian group")]
    RequiresAbelian(&'static str),

    #[error("negative epsilon {0}")]
    NegativeEpsilon(f64),

    #[error("disconnected complex: vertex {0} unreachable from base")]
    DisconnectedComplex(usize),

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("non-adjacent step {0} -> {1}")]
    NonAdjacentStep(usize, usize),

    #[error("unknown triangle {0:?}")]
    UnknownTriangle([usize; 3]),

    #[error("field is missing edge {0}-{1}")]
    MissingEdge(usize, usize),

    #[error("field has value for {0}-{1}, which is not an edge of the complex")]
    ExtraEdge(usize, usize),

    #[error("step size underflow during descent")]
    StepUnderflow,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
