//! RSQASM: stage-based, routed and scheduled QASM over grid cells.
//!
//! ```text
//! RSQASM 1.0;
//! h q[0];
//! cz q[2], q[1];
//! move q[3], q[4];
//! cz q[0], q[5];cz q[1], q[3];move q[2], q[4];
//! ```
//!
//! The first line is the header. Every following non-blank line is one stage
//! whose instructions run in parallel; each instruction ends with `;`.
//! Operands `q[i]` name grid cells. Rotations take one angle in radians,
//! QASM style: `rz(0.5) q[3];`. Lines starting with `//` are comments.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::gate::GateKind;
use crate::grid::Cell;
use crate::lex::{tokenize_line, LexError, Tok, Tokens};

/// One operation of a stage.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Gate {
        gate: GateKind,
        /// Present exactly for `rx`, `ry`, `rz`.
        angle: Option<f64>,
        operands: Vec<Cell>,
    },
    Move {
        src: Cell,
        dst: Cell,
    },
}

impl Instruction {
    pub fn gate(gate: GateKind, angle: Option<f64>, operands: Vec<Cell>) -> Self {
        Instruction::Gate { gate, angle, operands }
    }

    pub fn mv(src: Cell, dst: Cell) -> Self {
        Instruction::Move { src, dst }
    }

    /// Every cell the instruction touches.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let (operands, ends): (&[Cell], [Option<Cell>; 2]) = match self {
            Instruction::Gate { operands, .. } => (operands, [None, None]),
            Instruction::Move { src, dst } => (&[], [Some(*src), Some(*dst)]),
        };
        operands.iter().copied().chain(ends.into_iter().flatten())
    }

    pub fn references(&self, cell: Cell) -> bool {
        self.cells().any(|c| c == cell)
    }

    pub fn is_move(&self) -> bool {
        matches!(self, Instruction::Move { .. })
    }

    fn check(&self) -> Result<(), InstructionError> {
        match self {
            Instruction::Gate { gate, angle, operands } => {
                let expected = usize::from(gate.takes_angle());
                let found = usize::from(angle.is_some());
                if expected != found {
                    return Err(InstructionError::Param {
                        gate: *gate,
                        expected,
                        found,
                    });
                }
                if angle.is_some_and(|a| !a.is_finite()) {
                    return Err(InstructionError::NonFiniteAngle(*gate));
                }
                if operands.len() != gate.arity() {
                    return Err(InstructionError::Arity {
                        instruction: gate.name(),
                        expected: gate.arity(),
                        found: operands.len(),
                    });
                }
                Ok(())
            }
            Instruction::Move { .. } => Ok(()),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Gate { gate, angle, operands } => {
                f.write_str(gate.name())?;
                if let Some(angle) = angle {
                    f.write_char('(')?;
                    write_angle(f, *angle)?;
                    f.write_char(')')?;
                }
                for (i, c) in operands.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { ", " })?;
                    write!(f, "q[{c}]")?;
                }
                Ok(())
            }
            Instruction::Move { src, dst } => write!(f, "move q[{src}], q[{dst}]"),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
fn write_angle(f: &mut impl fmt::Write, v: f64) -> fmt::Result {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        write!(f, "{v:e}")
    } else {
        write!(f, "{v}")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InstructionError {
    #[error("`{instruction}` takes {expected} operand(s), found {found}")]
    Arity {
        instruction: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("`{gate}` takes {expected} angle(s), found {found}")]
    Param {
        gate: GateKind,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` angle is not finite")]
    NonFiniteAngle(GateKind),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    #[error("a stage needs at least one instruction")]
    Empty,
    #[error("cell {0} is used by more than one operand in the stage")]
    DuplicateCell(Cell),
    #[error("instruction {index}: {source}")]
    Instruction { index: usize, source: InstructionError },
}

/// A non-empty set of instructions that touch pairwise disjoint cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    ops: Vec<Instruction>,
}

impl Stage {
    pub fn new(ops: Vec<Instruction>) -> Result<Self, StageError> {
        if ops.is_empty() {
            return Err(StageError::Empty);
        }
        for (index, op) in ops.iter().enumerate() {
            op.check().map_err(|source| StageError::Instruction { index, source })?;
        }
        if let Some(cell) = first_duplicate(ops.iter().flat_map(Instruction::cells)) {
            return Err(StageError::DuplicateCell(cell));
        }
        Ok(Stage { ops })
    }

    pub fn ops(&self) -> &[Instruction] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<Instruction> {
        self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(src, dst)` of every move.
    pub fn moves(&self) -> impl Iterator<Item = (Cell, Cell)> + '_ {
        self.ops.iter().filter_map(|op| match *op {
            Instruction::Move { src, dst } => Some((src, dst)),
            _ => None,
        })
    }

    pub fn gates(&self) -> impl Iterator<Item = (GateKind, &[Cell])> + '_ {
        self.ops.iter().filter_map(|op| match op {
            Instruction::Gate { gate, operands, .. } => Some((*gate, operands.as_slice())),
            _ => None,
        })
    }

    pub fn has_gate(&self) -> bool {
        self.gates().next().is_some()
    }

    pub fn has_move(&self) -> bool {
        self.moves().next().is_some()
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in &self.ops {
            write!(f, "{op};")?;
        }
        Ok(())
    }
}

fn first_duplicate(cells: impl Iterator<Item = Cell>) -> Option<Cell> {
    let mut seen = alloc::collections::BTreeSet::new();
    cells.into_iter().find(|&c| !seen.insert(c))
}

/// A parsed RSQASM document.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub version_major: u32,
    pub version_minor: u32,
    pub stages: Vec<Stage>,
}

impl Default for Program {
    fn default() -> Self {
        Program::new(Vec::new())
    }
}

impl Program {
    /// Version 1.0 program.
    pub fn new(stages: Vec<Stage>) -> Self {
        Program {
            version_major: 1,
            version_minor: 0,
            stages,
        }
    }

    pub fn instructions(&self) -> impl Iterator<Item = &Instruction> + '_ {
        self.stages.iter().flat_map(|s| s.ops.iter())
    }

    pub fn move_count(&self) -> usize {
        self.instructions().filter(|i| i.is_move()).count()
    }

    pub fn gate_count(&self) -> usize {
        self.instructions().filter(|i| !i.is_move()).count()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RSQASM {}.{};", self.version_major, self.version_minor)?;
        for stage in &self.stages {
            writeln!(f, "{stage}")?;
        }
        Ok(())
    }
}

/// Canonical text: header, one line per stage, LF line endings.
pub fn serialize_program(p: &Program) -> String {
    format!("{p}")
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("missing `RSQASM <major>.<minor>;` header")]
    MissingHeader,
    #[error("unsupported RSQASM version {major}.{minor}")]
    UnsupportedVersion { major: u32, minor: u32 },
    #[error("unknown instruction `{0}`")]
    UnknownInstruction(String),
    #[error("`{instruction}` takes {expected} operand(s), found {found}")]
    ArityError {
        instruction: String,
        expected: usize,
        found: usize,
    },
    #[error("`{gate}` takes {expected} angle(s), found {found}")]
    ParamError {
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("cell {0} appears more than once in the stage")]
    DuplicateCellInStage(Cell),
    #[error("{0}")]
    SyntaxError(String),
}

/// A diagnostic with its 1-based source position.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    /// Stable identifier of the error kind.
    pub fn name(&self) -> &'static str {
        match self.kind {
            ParseErrorKind::MissingHeader => "MissingHeader",
            ParseErrorKind::UnsupportedVersion { .. } => "UnsupportedVersion",
            ParseErrorKind::UnknownInstruction(_) => "UnknownInstruction",
            ParseErrorKind::ArityError { .. } => "ArityError",
            ParseErrorKind::ParamError { .. } => "ParamError",
            ParseErrorKind::DuplicateCellInStage(_) => "DuplicateCellInStage",
            ParseErrorKind::SyntaxError(_) => "SyntaxError",
        }
    }

    fn at((line, column): (usize, usize), kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            line: e.line,
            column: e.column,
            kind: ParseErrorKind::SyntaxError(e.message),
        }
    }
}

pub fn parse_program(document: &str) -> Result<Program, ParseError> {
    parse_program_with_lines(document).map(|(p, _)| p)
}

/// Like [`parse_program`], for raw bytes that may not be UTF-8.
pub fn parse_program_bytes(document: &[u8]) -> Result<Program, ParseError> {
    let text = core::str::from_utf8(document).map_err(|e| {
        let valid = &document[..e.valid_up_to()];
        let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = valid.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        // The valid prefix is UTF-8, so counting chars is safe.
        let column = core::str::from_utf8(&valid[line_start..]).map_or(1, |s| s.chars().count() + 1);
        ParseError {
            line,
            column,
            kind: ParseErrorKind::SyntaxError("invalid UTF-8".into()),
        }
    })?;
    parse_program(text)
}

/// Parses a document and also returns the 1-based source line of each stage.
pub fn parse_program_with_lines(document: &str) -> Result<(Program, Vec<usize>), ParseError> {
    let mut lines = document.lines().enumerate().map(|(i, l)| (i + 1, l)).filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with("//")
    });

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| ParseError::at((1, 1), ParseErrorKind::MissingHeader))?;
    let (version_major, version_minor) = parse_header(header, header_line)?;

    let mut stages = Vec::new();
    let mut stage_lines = Vec::new();
    for (line_no, line) in lines {
        stages.push(parse_stage(line, line_no)?);
        stage_lines.push(line_no);
    }
    Ok((
        Program {
            version_major,
            version_minor,
            stages,
        },
        stage_lines,
    ))
}

fn end_of(line: &str, line_no: usize) -> (usize, usize) {
    (line_no, line.chars().count() + 1)
}

fn parse_header(line: &str, line_no: usize) -> Result<(u32, u32), ParseError> {
    let missing = |col| ParseError::at((line_no, col), ParseErrorKind::MissingHeader);
    let toks = tokenize_line(line, line_no).map_err(|e| missing(e.column))?;
    let mut ts = Tokens::new(&toks, end_of(line, line_no));
    match ts.next() {
        Some(t) if t.tok == Tok::Ident("RSQASM") => {}
        Some(t) => return Err(missing(t.column)),
        None => return Err(missing(1)),
    }
    let pos = ts.position();
    let (major, minor) = match ts.next().map(|t| t.tok) {
        Some(Tok::Number(v)) => v
            .split_once('.')
            .and_then(|(a, b)| {
                let digits = |s: &str| !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit());
                if digits(a) && digits(b) {
                    Some((a.parse::<u32>().ok()?, b.parse::<u32>().ok()?))
                } else {
                    None
                }
            })
            .ok_or_else(|| ParseError::at(pos, ParseErrorKind::SyntaxError(format!("malformed version `{v}`"))))?,
        _ => {
            return Err(ParseError::at(
                pos,
                ParseErrorKind::SyntaxError("expected version `<major>.<minor>`".into()),
            ))
        }
    };
    if major != 1 {
        return Err(ParseError::at(pos, ParseErrorKind::UnsupportedVersion { major, minor }));
    }
    ts.expect(Tok::Semi)?;
    if !ts.is_empty() {
        return Err(ts.unexpected("end of header line").into());
    }
    Ok((major, minor))
}

fn parse_stage(line: &str, line_no: usize) -> Result<Stage, ParseError> {
    let toks = tokenize_line(line, line_no)?;
    let mut ts = Tokens::new(&toks, end_of(line, line_no));
    let mut ops = Vec::new();
    let mut seen = alloc::collections::BTreeSet::new();
    while !ts.is_empty() {
        let start = ts.position();
        let name = ts.ident()?;
        let gate = match name {
            "move" => None,
            _ => Some(
                GateKind::from_name(name)
                    .ok_or_else(|| ParseError::at(start, ParseErrorKind::UnknownInstruction(name.into())))?,
            ),
        };

        let mut angles = Vec::new();
        if ts.eat(Tok::LParen) && !ts.eat(Tok::RParen) {
            loop {
                angles.push(ts.angle()?);
                if ts.eat(Tok::RParen) {
                    break;
                }
                ts.expect(Tok::Comma)?;
            }
        }
        let expected_angles = gate.map_or(0, |g| usize::from(g.takes_angle()));
        if angles.len() != expected_angles {
            return Err(ParseError::at(
                start,
                ParseErrorKind::ParamError {
                    gate: name.into(),
                    expected: expected_angles,
                    found: angles.len(),
                },
            ));
        }

        let mut operands = Vec::new();
        loop {
            let pos = ts.position();
            let (reg, index) = ts.indexed()?;
            if reg != "q" {
                return Err(ParseError::at(
                    pos,
                    ParseErrorKind::SyntaxError(format!("expected operand `q[<cell>]`, found `{reg}`")),
                ));
            }
            let cell = usize::try_from(index)
                .map(Cell)
                .map_err(|_| ParseError::at(pos, ParseErrorKind::SyntaxError("cell index out of range".into())))?;
            if !seen.insert(cell) {
                return Err(ParseError::at(pos, ParseErrorKind::DuplicateCellInStage(cell)));
            }
            operands.push(cell);
            if !ts.eat(Tok::Comma) {
                break;
            }
        }
        let expected = gate.map_or(2, GateKind::arity);
        if operands.len() != expected {
            return Err(ParseError::at(
                start,
                ParseErrorKind::ArityError {
                    instruction: name.into(),
                    expected,
                    found: operands.len(),
                },
            ));
        }
        if !ts.eat(Tok::Semi) {
            return Err(ts.unexpected("`;`").into());
        }
        ops.push(match gate {
            Some(gate) => Instruction::Gate {
                gate,
                angle: angles.first().copied(),
                operands,
            },
            None => Instruction::Move {
                src: operands[0],
                dst: operands[1],
            },
        });
    }
    // Everything Stage::new checks has been checked above with positions.
    Ok(Stage::new(ops).expect("parser enforces stage invariants"))
}
