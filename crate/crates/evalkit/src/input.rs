use std::fs;
use std::path::{Path, PathBuf};

use na_evalkit_core::arch::{parse_architecture_with_warnings, ArchitectureSpec};
use na_evalkit_core::eval::EvalError;
use na_evalkit_core::grid::SimulationError;
use na_evalkit_core::normalize::NormalizeError;
use na_evalkit_core::rsqasm::{parse_program_bytes, parse_program_with_lines, Program};

use crate::CliError;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn read_text(path: &Path, what: &'static str) -> Result<String, CliError> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|e| {
        CliError::domain(
            what,
            format!(
                "{}: invalid UTF-8 at byte {}",
                path.display(),
                e.utf8_error().valid_up_to()
            ),
        )
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// An architecture file with the keys it ignored.
#[derive(Debug, Clone)]
pub struct Architecture {
    pub path: PathBuf,
    pub spec: ArchitectureSpec,
    pub warnings: Vec<String>,
}

impl Architecture {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_text(path, "MalformedDocument")?;
        let parsed = parse_architecture_with_warnings(&text).map_err(|e| CliError::from(e).in_file(path))?;
        let warnings = parsed
            .warnings
            .into_iter()
            .map(|key| format!("{}: ignoring unknown key `{key}`", path.display()))
            .collect();
        Ok(Architecture {
            path: path.to_path_buf(),
            spec: parsed.spec,
            warnings,
        })
    }
}

/// A parsed RSQASM file. Keeps the source line of every stage so that
/// simulation errors can point back into the file.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub path: PathBuf,
    pub program: Program,
    pub stage_lines: Vec<usize>,
}

impl Circuit {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let bytes = read_bytes(path)?;
        let parsed = match std::str::from_utf8(&bytes) {
            Ok(text) => parse_program_with_lines(text),
            Err(_) => parse_program_bytes(&bytes).map(|p| (p, Vec::new())),
        };
        let (program, stage_lines) = parsed.map_err(|e| CliError::from(e).in_file(path))?;
        Ok(Circuit {
            path: path.to_path_buf(),
            program,
            stage_lines,
        })
    }

    /// `path:line: stage N` for a zero-based stage index; `N` counts from 1.
    pub fn stage_location(&self, stage: usize) -> String {
        match self.stage_lines.get(stage) {
            Some(line) => format!("{}:{line}: stage {}", self.path.display(), stage + 1),
            None => format!("{}: stage {}", self.path.display(), stage + 1),
        }
    }

    pub fn simulation_error(&self, e: &SimulationError) -> CliError {
        CliError::domain(
            "IllegalStage",
            format!("{}: {}", self.stage_location(e.stage), e.diagnosis),
        )
    }

    pub fn eval_error(&self, e: EvalError) -> CliError {
        match &e {
            EvalError::IllegalStage(s) => self.simulation_error(s),
            _ => CliError::from(e).in_file(&self.path),
        }
    }

    pub fn normalize_error(&self, e: NormalizeError) -> CliError {
        match e {
            NormalizeError::IllegalInput(s) => CliError::domain("IllegalInput", self.simulation_error(&s).message()),
        }
    }
}
