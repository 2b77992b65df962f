use std::path::PathBuf;

use funcausal_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("replicate {id}: {source}")]
    Replicate {
        id: String,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Data(_) => exit::DATA,
            CliError::Numerical(_) => exit::NUMERICAL,
            CliError::Io { .. } => exit::IO,
            CliError::Replicate { source, .. } => source.exit_code(),
            CliError::Core(e) => match e {
                CoreError::InvalidParameter { .. } => exit::CONFIG,
                CoreError::NonFinite(_) | CoreError::Diverged { .. } | CoreError::ZeroVariance(_) => {
                    exit::NUMERICAL
                }
                _ => exit::DATA,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
