use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A dataset spec or pattern failed validation.
    InvalidSpec(String),
    /// A poem block had the wrong number of lines.
    MalformedBlock {
        split: String,
        block: usize,
        first_line: usize,
        expected: String,
        found: usize,
    },
    NoPoems { split: String },
    MissingSplit(String),
    InvalidPoem(String),
    /// Requested synthetic corpus cannot be built with the given sizes.
    Infeasible(String),
    LengthMismatch { expected: usize, found: usize },
    DimensionMismatch { expected: usize, found: usize },
    EmptyDictionary,
    NoPositiveLabels,
    NoLabeledPairs,
    EmptySplit,
    InvalidConfig(String),
    Shape(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpec(msg) => write!(f, "invalid dataset spec: {msg}"),
            Error::MalformedBlock {
                split,
                block,
                first_line,
                expected,
                found,
            } => write!(
                f,
                "malformed poem block {block} in split {split} (starting at line {first_line}): expected {expected} lines, found {found}"
            ),
            Error::NoPoems { split } => write!(f, "no poems found in split {split}"),
            Error::MissingSplit(name) => write!(f, "missing split file: {name}"),
            Error::InvalidPoem(msg) => write!(f, "invalid poem: {msg}"),
            Error::Infeasible(msg) => write!(f, "infeasible synthetic corpus: {msg}"),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyDictionary => write!(f, "pronunciation dictionary is empty"),
            Error::NoPositiveLabels => write!(f, "no positive labels in dev pairs"),
            Error::NoLabeledPairs => write!(f, "no labeled pairs"),
            Error::EmptySplit => write!(f, "split is empty"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
