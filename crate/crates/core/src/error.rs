use std::fmt;
use std::path::PathBuf;

use crate::model::RecordKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid date {input:?}: {reason}")]
    Format { input: String, reason: String },

    #[error("unknown translation code {0:?}")]
    UnknownCode(String),

    #[error("malformed XML: {0}")]
    Xml(String),

    #[error("duplicate typed node {0}")]
    DuplicateId(RecordKey),

    #[error("typed node <{0}> has no ID attribute")]
    MissingId(String),

    #[error("{context}: {violations}")]
    InvariantViolation { context: String, violations: String },

    #[error("record starting on line {0} is not terminated by </RECORD>")]
    UnterminatedRecord(usize),

    #[error("line {line}: malformed tag line {text:?}")]
    MalformedTagLine { line: usize, text: String },

    #[error("legacy record has no RCN entry")]
    MissingRcn,

    #[error("unrecognized exchange file name {name:?}: {reason}")]
    UnrecognizedName { name: String, reason: String },

    #[error("records {first} and {second} map to the same file name {name}")]
    DuplicateObject {
        name: String,
        first: RecordKey,
        second: RecordKey,
    },

    #[error("unknown encoding label {0:?}")]
    UnknownEncoding(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    BadLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(input: &str, reason: impl Into<String>) -> Self {
        Error::Format {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}

/// Category of a non-fatal diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WarningKind {
    UnknownElement,
    AssumedNamespace,
    NormalizedCode,
    EmptyListItem,
    UnsupportedNode,
    DuplicateIdAcrossTypes,
    DanglingReference,
    Extension,
    Provenance,
    DroppedText,
    UnknownTag,
    BadBlock,
    TieBreak,
    DefaultStatus,
    Lint,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

impl Warning {
    pub fn new(kind: WarningKind, message: impl Into<String>) -> Self {
        Warning {
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "warning[{:?}]: {}", self.kind, self.message)
    }
}
