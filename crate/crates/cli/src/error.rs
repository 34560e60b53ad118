use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

/// Where a configuration value came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag(String),
    Default,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag(key) => write!(f, "flag --{key}"),
            Origin::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{origin}: {message}")]
    Config { origin: Origin, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("checkpoint {path} was written for a different configuration (hash {found}, expected {expected})")]
    HashMismatch {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error(transparent)]
    Model(#[from] corruption_lattice::Error),
}

impl CliError {
    pub fn config(origin: Origin, message: impl Into<String>) -> Self {
        CliError::Config {
            origin,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// 1 configuration, 2 I/O or malformed input file, 3 numeric or contract
    /// violation.
    pub fn exit_code(&self) -> i32 {
        use corruption_lattice::Error as E;
        match self {
            CliError::Config { .. } | CliError::Usage(_) | CliError::HashMismatch { .. } => 1,
            CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::Model(E::ContractViolation(_)) => 3,
            CliError::Model(_) => 1,
        }
    }
}
