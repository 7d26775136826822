//! The subcommands, independent of argument parsing. Each returns what to
//! print and the exit code instead of printing.

use std::path::{Path, PathBuf};

use na_evalkit_core::grid::{self, cz_beyond_radius};
use na_evalkit_core::ingest::{parse_flat_qasm, to_rsqasm, Packing};
use na_evalkit_core::models::{whatif_collapse, WhatIfInput};
use na_evalkit_core::normalize::collapse;
use na_evalkit_core::rsqasm::serialize_program;
use na_evalkit_core::ModelSelector;
use rayon::prelude::*;

use crate::input::{read_text, write_text, Architecture, Circuit};
use crate::report::{self, EvaluationRow, Format, Metrics, NormalizationRow, WhatIfRow};
use crate::CliError;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    /// Diagnostics for stderr, without the `warning:` prefix.
    pub warnings: Vec<String>,
    pub exit_code: u8,
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn radius_warnings(c: &Circuit, side: u32, radius: Option<f64>) -> Vec<String> {
    let Some(radius) = radius else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (i, stage) in c.program.stages.iter().enumerate() {
        for (a, b, d) in cz_beyond_radius(stage, side, radius) {
            out.push(format!(
                "{}: cz {a}, {b} spans {d:.3} cells, beyond the interaction radius {radius}",
                c.stage_location(i)
            ));
        }
    }
    out
}

pub fn validate(circuit: &Path, arch: &Path, radius: Option<f64>) -> Result<Output, CliError> {
    let arch = Architecture::load(arch)?;
    let c = Circuit::load(circuit)?;
    let initial = grid::initial_state(&arch.spec);
    let end = grid::simulate(&c.program, &initial).map_err(|e| c.simulation_error(&e))?;
    let mut warnings = arch.warnings;
    warnings.extend(radius_warnings(&c, arch.spec.grid_side, radius));
    Ok(Output {
        stdout: format!(
            "{}: ok, {} stages, {} gates, {} moves, {} atoms\n",
            c.path.display(),
            c.program.stages.len(),
            c.program.gate_count(),
            c.program.move_count(),
            end.occupied_count()
        ),
        warnings,
        exit_code: 0,
    })
}

fn evaluate_circuit(c: &Circuit, arch: &Architecture, model: ModelSelector) -> Result<Metrics, CliError> {
    model
        .evaluate(&c.program, &arch.spec)
        .map(|b| Metrics::from(&b))
        .map_err(|e| c.eval_error(e))
}

pub fn evaluate(
    circuit: &Path,
    arch: &Path,
    model: ModelSelector,
    format: Format,
    radius: Option<f64>,
) -> Result<Output, CliError> {
    let arch = Architecture::load(arch)?;
    let c = Circuit::load(circuit)?;
    let metrics = evaluate_circuit(&c, &arch, model)?;
    let mut warnings = arch.warnings.clone();
    warnings.extend(radius_warnings(&c, arch.spec.grid_side, radius));
    Ok(Output {
        stdout: report::render_evaluation(format, model.name(), &display(&arch.path), &display(circuit), &metrics),
        warnings,
        exit_code: 0,
    })
}

pub fn normalize(circuit: &Path, arch: &Path, emit: Option<&Path>, format: Format) -> Result<Output, CliError> {
    let arch = Architecture::load(arch)?;
    let c = Circuit::load(circuit)?;
    let (collapsed, r) = collapse(&c.program, &arch.spec).map_err(|e| c.normalize_error(e))?;
    if let Some(out) = emit {
        write_text(out, &serialize_program(&collapsed))?;
    }
    let mut warnings = arch.warnings;
    for w in &r.rewrites_skipped {
        warnings.push(format!(
            "{}: skipped {} with stage {}: it would change the final placement",
            c.stage_location(w.first_stage),
            w.rule,
            w.second_stage + 1
        ));
    }
    let emitted = emit.map(display);
    Ok(Output {
        stdout: report::render_normalization(
            format,
            &display(circuit),
            &display(&arch.path),
            emitted.as_deref(),
            &NormalizationRow::from(&r),
        ),
        warnings,
        exit_code: 0,
    })
}

/// Evaluates every circuit in parallel. Rows keep the input order and a
/// failing circuit only fails its own row.
pub fn compare(circuits: &[PathBuf], arch: &Path, model: ModelSelector, format: Format) -> Result<Output, CliError> {
    if circuits.is_empty() {
        return Err(CliError::Usage("compare needs at least one circuit".into()));
    }
    let arch = Architecture::load(arch)?;
    let rows: Vec<EvaluationRow> = circuits
        .par_iter()
        .map(|path| {
            let name = display(path);
            match Circuit::load(path).and_then(|c| evaluate_circuit(&c, &arch, model)) {
                Ok(m) => EvaluationRow {
                    circuit: name,
                    result: Ok(m),
                },
                Err(e) => EvaluationRow::failed(name, &e),
            }
        })
        .collect();
    let failed = rows.iter().any(|r| r.result.is_err());
    Ok(Output {
        stdout: report::render_comparison(format, model.name(), &display(&arch.path), &rows),
        warnings: arch.warnings,
        exit_code: if failed { 2 } else { 0 },
    })
}

pub fn whatif(input: &WhatIfInput, arch: &Path, format: Format) -> Result<Output, CliError> {
    let arch = Architecture::load(arch)?;
    let r = whatif_collapse(input, &arch.spec)?;
    Ok(Output {
        stdout: report::render_whatif(format, &display(&arch.path), input, &WhatIfRow::from(&r)),
        warnings: arch.warnings,
        exit_code: 0,
    })
}

/// Converts flat QASM to RSQASM, written to `out` or returned as stdout.
pub fn ingest(qasm: &Path, arch: &Path, packing: Packing, out: Option<&Path>) -> Result<Output, CliError> {
    let arch = Architecture::load(arch)?;
    let text = read_text(qasm, "SyntaxError")?;
    let flat = parse_flat_qasm(&text).map_err(|e| CliError::from(e).in_file(qasm))?;
    let program = to_rsqasm(&flat, &arch.spec, packing)?;
    let rendered = serialize_program(&program);
    let stdout = match out {
        Some(path) => {
            write_text(path, &rendered)?;
            String::new()
        }
        None => rendered,
    };
    Ok(Output {
        stdout,
        warnings: arch.warnings,
        exit_code: 0,
    })
}
