//! File IO, report formats and subcommands for the `na-evalkit` binary.
//!
//! The evaluation logic lives in [`na_evalkit_core`]; this crate reads the
//! circuit and architecture files, renders reports and maps failures onto
//! exit codes (0 success, 1 IO or usage, 2 invalid input).

pub mod commands;
mod error;
pub mod input;
pub mod report;

pub use error::CliError;
pub use report::Format;

/// How diagnostics on stderr are coloured, from `NA_EVALKIT_COLOR`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColorChoice {
    #[default]
    Auto,
    Always,
    Never,
}

impl ColorChoice {
    pub const ENV: &'static str = "NA_EVALKIT_COLOR";

    /// Unset means `auto`; anything but `auto`, `always` or `never` is an error.
    pub fn parse(value: Option<&str>) -> Result<Self, CliError> {
        match value {
            None | Some("auto") => Ok(ColorChoice::Auto),
            Some("always") => Ok(ColorChoice::Always),
            Some("never") => Ok(ColorChoice::Never),
            Some(other) => Err(CliError::Usage(format!(
                "{}={other} is not one of auto, always, never",
                Self::ENV
            ))),
        }
    }

    pub fn enabled(self, is_terminal: bool) -> bool {
        match self {
            ColorChoice::Auto => is_terminal,
            ColorChoice::Always => true,
            ColorChoice::Never => false,
        }
    }
}
