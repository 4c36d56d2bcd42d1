//! Error taxonomy shared across the harness.
//!
//! Variants map onto process exit codes: configuration problems exit 2,
//! data problems (parsing, lookups, inconsistent inputs) exit 3, and
//! transport/protocol problems when talking to a generation endpoint exit 4.

use thiserror::Error;

/// Harness-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad rates, missing required fields, guard violations.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid input data not tied to a specific line.
    #[error("input error: {0}")]
    Input(String),

    /// A malformed record in an input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An identifier that does not exist in the graph or dataset.
    #[error("lookup error: {0}")]
    Lookup(String),

    /// Internally inconsistent state, e.g. a mask referencing foreign triple ids.
    #[error("consistency error: {0}")]
    Consistency(String),

    /// Remote endpoint unreachable or persistently failing.
    #[error("transport error: {message}")]
    Transport {
        message: String,
        /// Last HTTP status observed, when any reply arrived at all.
        status: Option<u16>,
    },

    /// Remote endpoint replied with something that does not follow the protocol.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn lookup(msg: impl Into<String>) -> Self {
        Error::Lookup(msg.into())
    }

    pub fn consistency(msg: impl Into<String>) -> Self {
        Error::Consistency(msg.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Exit code for the CLI: 2 config, 3 data, 4 transport.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Input(_)
            | Error::Parse { .. }
            | Error::Lookup(_)
            | Error::Consistency(_)
            | Error::Io(_) => 3,
            Error::Transport { .. } | Error::Protocol(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
