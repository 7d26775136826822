use std::path::{Path, PathBuf};

use na_evalkit_core::arch::ArchError;
use na_evalkit_core::eval::EvalError;
use na_evalkit_core::grid::SimulationError;
use na_evalkit_core::ingest::IngestError;
use na_evalkit_core::normalize::NormalizeError;
use na_evalkit_core::rsqasm::ParseError;

/// Everything a command can fail with. The variant decides the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    /// A problem with the inputs themselves: parse, legality or model errors.
    #[error("{name}: {message}")]
    Domain { name: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) => 1,
            CliError::Domain { .. } => 2,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn domain(name: &'static str, message: impl Into<String>) -> Self {
        CliError::Domain {
            name,
            message: message.into(),
        }
    }

    /// Prefixes a domain message with the file it came from.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Domain { name, message } => CliError::Domain {
                name,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        }
    }

    /// Error name for reports: the domain name, or `IoError` / `UsageError`.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
            CliError::Domain { name, .. } => name,
        }
    }

    /// The message without the name prefix.
    pub fn message(&self) -> String {
        match self {
            CliError::Domain { message, .. } => message.clone(),
            other => other.to_string(),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::domain(e.name(), e.to_string())
    }
}

impl From<ArchError> for CliError {
    fn from(e: ArchError) -> Self {
        CliError::domain(e.name(), e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::domain(e.name(), e.to_string())
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        CliError::domain("IllegalStage", e.to_string())
    }
}

impl From<NormalizeError> for CliError {
    fn from(e: NormalizeError) -> Self {
        CliError::domain(e.name(), e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::domain(e.name(), e.to_string())
    }
}
