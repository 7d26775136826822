//! Report rows and their table, JSON and CSV renderings.
//!
//! Table mode shows fidelities as percentages with two decimals. JSON and
//! CSV carry the raw values with full round-trip precision.

use std::fmt::Write as _;
use std::str::FromStr;

use na_evalkit_core::models::{WhatIfInput, WhatIfResult};
use na_evalkit_core::normalize::{NormalizationReport, Rule};
use na_evalkit_core::FidelityBreakdown;
use serde::Serialize;

use crate::CliError;

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (expected table, json or csv)")),
        }
    }
}

/// `100·f` with two decimals. Exact ties round to even.
pub fn percent(fraction: f64) -> String {
    format!("{:.2}", 100.0 * fraction)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub f_decoherence: f64,
    pub f_gates: f64,
    pub f_movements: f64,
    pub asp: f64,
    pub t_total_us: f64,
    pub t_idle_us: f64,
    pub gate_count: usize,
    pub one_qubit_gate_count: usize,
    pub two_qubit_gate_count: usize,
    pub move_count: usize,
    pub stage_count: usize,
    pub total_move_distance_cells: f64,
}

impl From<&FidelityBreakdown> for Metrics {
    fn from(b: &FidelityBreakdown) -> Self {
        Metrics {
            f_decoherence: b.f_decoherence,
            f_gates: b.f_gates,
            f_movements: b.f_movements,
            asp: b.asp,
            t_total_us: b.t_total,
            t_idle_us: b.t_idle,
            gate_count: b.gate_count,
            one_qubit_gate_count: b.one_qubit_gate_count,
            two_qubit_gate_count: b.two_qubit_gate_count,
            move_count: b.move_count,
            stage_count: b.stage_count,
            total_move_distance_cells: b.total_move_distance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub name: &'static str,
    pub message: String,
}

/// One circuit evaluated under one model, or the reason it could not be.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRow {
    pub circuit: String,
    pub result: Result<Metrics, RowError>,
}

impl EvaluationRow {
    pub fn failed(circuit: String, e: &CliError) -> Self {
        EvaluationRow {
            circuit,
            result: Err(RowError {
                name: e.name(),
                message: e.message(),
            }),
        }
    }
}

#[derive(Serialize)]
struct JsonEvaluation<'a> {
    tool: &'static str,
    version: &'static str,
    model: &'a str,
    inputs: JsonInputs<'a>,
    #[serde(flatten)]
    metrics: &'a Metrics,
}

#[derive(Serialize)]
struct JsonInputs<'a> {
    circuit: &'a str,
    architecture: &'a str,
}

#[derive(Serialize)]
struct JsonComparison<'a> {
    tool: &'static str,
    version: &'static str,
    model: &'a str,
    architecture: &'a str,
    rows: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    circuit: &'a str,
    #[serde(flatten)]
    metrics: Option<&'a Metrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a RowError>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    circuit: &'a str,
    model: &'a str,
    f_decoherence: Option<f64>,
    f_gates: Option<f64>,
    f_movements: Option<f64>,
    asp: Option<f64>,
    t_total_us: Option<f64>,
    t_idle_us: Option<f64>,
    gate_count: Option<usize>,
    one_qubit_gate_count: Option<usize>,
    two_qubit_gate_count: Option<usize>,
    move_count: Option<usize>,
    stage_count: Option<usize>,
    total_move_distance_cells: Option<f64>,
    error: &'a str,
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report values serialize");
    s.push('\n');
    s
}

fn csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("report rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv output is UTF-8")
}

/// Columns separated by two spaces; the first column is left aligned and
/// the rest right aligned. Rows of another length, such as errors, only
/// align their first cell.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        if row.len() == header.len() {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        } else if let Some(first) = row.first() {
            widths[0] = widths[0].max(first.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        if row.len() != widths.len() {
            let (first, rest) = row.split_first().expect("table rows are non-empty");
            let w = widths[0];
            let _ = write!(out, "{first:<w$}  {}", rest.join("  "));
        } else {
            for (i, (cell, w)) in row.iter().zip(&widths).enumerate() {
                if i == 0 {
                    let _ = write!(out, "{cell:<w$}");
                } else {
                    let _ = write!(out, "  {cell:>w$}");
                }
            }
        }
        let trimmed = out.trim_end_matches(' ').len();
        out.truncate(trimmed);
        out.push('\n');
    }
    out
}

const EVAL_HEADER: [&str; 9] = [
    "circuit", "model", "F_decoh%", "F_gates%", "F_moves%", "ASP%", "T_us", "moves", "stages",
];

fn eval_table(model: &str, rows: &[EvaluationRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| match &r.result {
            Ok(m) => vec![
                r.circuit.clone(),
                model.to_string(),
                percent(m.f_decoherence),
                percent(m.f_gates),
                percent(m.f_movements),
                percent(m.asp),
                format!("{:.3}", m.t_total_us),
                m.move_count.to_string(),
                m.stage_count.to_string(),
            ],
            Err(e) => vec![r.circuit.clone(), format!("error {}: {}", e.name, e.message)],
        })
        .collect();
    table(&EVAL_HEADER, &rows)
}

fn eval_csv(model: &str, rows: &[EvaluationRow]) -> String {
    csv(rows.iter().map(|r| {
        let m = r.result.as_ref().ok();
        CsvRow {
            circuit: &r.circuit,
            model,
            f_decoherence: m.map(|m| m.f_decoherence),
            f_gates: m.map(|m| m.f_gates),
            f_movements: m.map(|m| m.f_movements),
            asp: m.map(|m| m.asp),
            t_total_us: m.map(|m| m.t_total_us),
            t_idle_us: m.map(|m| m.t_idle_us),
            gate_count: m.map(|m| m.gate_count),
            one_qubit_gate_count: m.map(|m| m.one_qubit_gate_count),
            two_qubit_gate_count: m.map(|m| m.two_qubit_gate_count),
            move_count: m.map(|m| m.move_count),
            stage_count: m.map(|m| m.stage_count),
            total_move_distance_cells: m.map(|m| m.total_move_distance_cells),
            error: r.result.as_ref().err().map_or("", |e| e.name),
        }
    }))
}

/// Report for a single successfully evaluated circuit.
pub fn render_evaluation(format: Format, model: &str, architecture: &str, circuit: &str, metrics: &Metrics) -> String {
    match format {
        Format::Json => json(&JsonEvaluation {
            tool: TOOL,
            version: VERSION,
            model,
            inputs: JsonInputs { circuit, architecture },
            metrics,
        }),
        Format::Table | Format::Csv => {
            let row = [EvaluationRow {
                circuit: circuit.to_string(),
                result: Ok(metrics.clone()),
            }];
            if format == Format::Table {
                eval_table(model, &row)
            } else {
                eval_csv(model, &row)
            }
        }
    }
}

/// One row per circuit, in the given order.
pub fn render_comparison(format: Format, model: &str, architecture: &str, rows: &[EvaluationRow]) -> String {
    match format {
        Format::Table => eval_table(model, rows),
        Format::Csv => eval_csv(model, rows),
        Format::Json => json(&JsonComparison {
            tool: TOOL,
            version: VERSION,
            model,
            architecture,
            rows: rows
                .iter()
                .map(|r| JsonRow {
                    circuit: &r.circuit,
                    metrics: r.result.as_ref().ok(),
                    error: r.result.as_ref().err(),
                })
                .collect(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationRow {
    pub moves_before: usize,
    pub moves_after: usize,
    pub distance_before_cells: f64,
    pub distance_after_cells: f64,
    pub saved_distance_cells: f64,
    pub reversals_applied: usize,
    pub paths_applied: usize,
    pub rewrites_skipped: usize,
}

impl From<&NormalizationReport> for NormalizationRow {
    fn from(r: &NormalizationReport) -> Self {
        let applied = |rule| r.rewrites_applied.iter().filter(|w| w.rule == rule).count();
        NormalizationRow {
            moves_before: r.moves_before,
            moves_after: r.moves_after,
            distance_before_cells: r.distance_before,
            distance_after_cells: r.distance_after,
            saved_distance_cells: r.saved_distance,
            reversals_applied: applied(Rule::Reversal),
            paths_applied: applied(Rule::Path),
            rewrites_skipped: r.rewrites_skipped.len(),
        }
    }
}

#[derive(Serialize)]
struct JsonNormalization<'a> {
    tool: &'static str,
    version: &'static str,
    inputs: JsonInputs<'a>,
    emitted: Option<&'a str>,
    #[serde(flatten)]
    report: &'a NormalizationRow,
}

#[derive(Serialize)]
struct CsvNormalization<'a> {
    circuit: &'a str,
    moves_before: usize,
    moves_after: usize,
    distance_before_cells: f64,
    distance_after_cells: f64,
    saved_distance_cells: f64,
    reversals_applied: usize,
    paths_applied: usize,
    rewrites_skipped: usize,
}

pub fn render_normalization(
    format: Format,
    circuit: &str,
    architecture: &str,
    emitted: Option<&str>,
    r: &NormalizationRow,
) -> String {
    match format {
        Format::Json => json(&JsonNormalization {
            tool: TOOL,
            version: VERSION,
            inputs: JsonInputs { circuit, architecture },
            emitted,
            report: r,
        }),
        Format::Csv => csv([CsvNormalization {
            circuit,
            moves_before: r.moves_before,
            moves_after: r.moves_after,
            distance_before_cells: r.distance_before_cells,
            distance_after_cells: r.distance_after_cells,
            saved_distance_cells: r.saved_distance_cells,
            reversals_applied: r.reversals_applied,
            paths_applied: r.paths_applied,
            rewrites_skipped: r.rewrites_skipped,
        }]),
        Format::Table => table(
            &[
                "circuit",
                "moves_before",
                "moves_after",
                "saved_distance_cells",
                "R1",
                "R2",
                "skipped",
            ],
            &[vec![
                circuit.to_string(),
                r.moves_before.to_string(),
                r.moves_after.to_string(),
                format!("{:.2}", r.saved_distance_cells),
                r.reversals_applied.to_string(),
                r.paths_applied.to_string(),
                r.rewrites_skipped.to_string(),
            ]],
        ),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhatIfRow {
    pub delta_t_move_us: f64,
    pub delta_t_idle_us: f64,
    pub t_idle_us: f64,
    pub f_decoherence: f64,
    pub f_movements: f64,
}

impl From<&WhatIfResult> for WhatIfRow {
    fn from(r: &WhatIfResult) -> Self {
        WhatIfRow {
            delta_t_move_us: r.delta_t_move,
            delta_t_idle_us: r.delta_t_idle,
            t_idle_us: r.t_idle,
            f_decoherence: r.f_decoherence,
            f_movements: r.f_movements,
        }
    }
}

#[derive(Serialize)]
struct JsonWhatIf<'a> {
    tool: &'static str,
    version: &'static str,
    architecture: &'a str,
    old_t_idle_us: f64,
    saved_distance_cells: f64,
    moves_before: usize,
    moves_after: usize,
    n: usize,
    #[serde(flatten)]
    result: &'a WhatIfRow,
}

pub fn render_whatif(format: Format, architecture: &str, input: &WhatIfInput, r: &WhatIfRow) -> String {
    match format {
        Format::Json => json(&JsonWhatIf {
            tool: TOOL,
            version: VERSION,
            architecture,
            old_t_idle_us: input.old_t_idle,
            saved_distance_cells: input.saved_distance,
            moves_before: input.old_move_count,
            moves_after: input.new_move_count,
            n: input.n,
            result: r,
        }),
        Format::Csv => csv([r]),
        Format::Table => table(
            &["dT_move_us", "dt_idle_us", "t_idle_us", "F_decoh%", "F_moves%"],
            &[vec![
                format!("{:.3}", r.delta_t_move_us),
                format!("{:.3}", r.delta_t_idle_us),
                format!("{:.3}", r.t_idle_us),
                percent(r.f_decoherence),
                percent(r.f_movements),
            ]],
        ),
    }
}
