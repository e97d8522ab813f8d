use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange {
        face: usize,
        index: usize,
        count: usize,
    },

    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),

    #[error("{0}")]
    InvalidInput(String),

    #[error("value {value} does not fit the signed 32-bit quantization range")]
    QuantOverflow { value: f64 },

    #[error("truncated stream: {0}")]
    Truncated(&'static str),

    #[error("bad magic, not a TVMC container")]
    BadMagic,

    #[error("unsupported container version {found} (expected {expected})")]
    Version { found: u8, expected: u8 },

    #[error("checksum mismatch in {0}")]
    Checksum(String),

    #[error("malformed container: {0}")]
    Malformed(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl std::fmt::Display, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.to_string(),
            message: message.into(),
        }
    }
}
