//! Failures carry the process exit code they map to.

use std::fmt;
use std::path::Path;

use patchmol::blob::BlobError;
use patchmol::evalx::EvalError;
use patchmol::nets::NetError;
use patchmol::qpatch::QError;
use patchmol::train::TrainError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MISSING: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    pub fn missing(path: &Path) -> Self {
        CliError {
            code: EXIT_MISSING,
            message: format!("missing artifact: {}", path.display()),
        }
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INTERNAL,
            message: msg.into(),
        }
    }

    /// A missing file is a missing artifact; any other I/O failure is
    /// internal.
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            Self::missing(path)
        } else {
            Self::internal(format!("{}: {e}", path.display()))
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Config(_) => CliError::usage(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(_) => CliError::usage(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<QError> for CliError {
    fn from(e: QError) -> Self {
        match e {
            QError::Config(_) => CliError::usage(e.to_string()),
            _ => CliError::internal(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<BlobError> for CliError {
    fn from(e: BlobError) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::internal(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::internal(e.to_string())
    }
}
