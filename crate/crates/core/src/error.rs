use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error in record {record}: {msg}")]
    Parse { record: usize, msg: String },

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("invalid kmer: {0}")]
    InvalidKmer(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("inconsistent inputs: {0}")]
    Mismatch(String),

    #[error("malformed model file: {0}")]
    Model(String),

    #[error("no trainable reads (all reads contained N, had the wrong length, or produced dead trellises)")]
    NoTrainableReads,

    #[error("inconsistent state path at position {0}: consecutive kmers do not overlap")]
    BrokenPath(usize),
}

impl Error {
    /// Errors caused by user-supplied inputs or flags, as opposed to runtime failures.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io(e) => matches!(
                e.kind(),
                io::ErrorKind::NotFound | io::ErrorKind::PermissionDenied | io::ErrorKind::InvalidData
            ),
            Error::Parse { .. }
            | Error::Format { .. }
            | Error::InvalidKmer(_)
            | Error::Config(_)
            | Error::Mismatch(_)
            | Error::Model(_) => true,
            Error::NoTrainableReads | Error::BrokenPath(_) => false,
        }
    }
}
