use std::path::PathBuf;

use wmac_core::simulation::RunFailure;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad flag: {0}")]
    BadFlag(String),
    #[error("{path}{}: {message}", location(*line, field.as_deref()))]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        field: Option<String>,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("run failed: {0}")]
    Run(RunFailure),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{0} verification check(s) failed")]
    Verify(usize),
}

fn location(line: Option<usize>, field: Option<&str>) -> String {
    match (line, field) {
        (Some(l), Some(f)) => format!(":{l} (field `{f}`)"),
        (Some(l), None) => format!(":{l}"),
        (None, Some(f)) => format!(" (field `{f}`)"),
        (None, None) => String::new(),
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::BadFlag(_) => "bad_flag",
            CliError::Parse { .. } => "parse_error",
            CliError::Validation(_) => "validation_error",
            CliError::Run(f) if is_divergence(f) => "diverged",
            CliError::Run(_) => "run_error",
            CliError::Io { .. } => "io_error",
            CliError::Format(_) => "format_error",
            CliError::Verify(_) => "verify_failed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::BadFlag(_) | CliError::Parse { .. } | CliError::Validation(_) => exit::CONFIG,
            CliError::Run(f) if is_divergence(f) => exit::DIVERGED,
            CliError::Run(_) => exit::RUNTIME,
            CliError::Io { .. } | CliError::Format(_) => exit::IO,
            CliError::Verify(_) => exit::VERIFY,
        }
    }
}

fn is_divergence(f: &RunFailure) -> bool {
    matches!(
        f.error,
        wmac_core::Error::Diverged { .. } | wmac_core::Error::SingularMass { .. }
    )
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY: u8 = 1;
    /// Bad flags, unreadable scenario files and invalid settings.
    pub const CONFIG: u8 = 2;
    pub const DIVERGED: u8 = 3;
    pub const IO: u8 = 4;
    pub const RUNTIME: u8 = 5;
}
