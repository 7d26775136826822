//! Builds RSQASM test inputs from a flat, already-native QASM 2.0 subset.
//!
//! Accepted: the `OPENQASM 2.x;` header, `include "qelib1.inc";`, a single
//! `qreg`, native gates and `barrier`. Logical qubit `i` is placed on the
//! `i`-th occupied cell of the architecture in row-major order. No routing
//! happens, so the output never contains moves.
//!
//! `barrier` is never a gate. In greedy packing it is a fence for the qubits
//! it names: no later gate on those qubits is scheduled before a stage that
//! already holds an earlier gate on any of them.

use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use crate::arch::ArchitectureSpec;
use crate::gate::GateKind;
use crate::grid::Cell;
use crate::lex::{tokenize_line, LexError, Tok, Token, Tokens};
use crate::rsqasm::{Instruction, Program, Stage};

#[derive(Debug, Clone, PartialEq)]
pub enum FlatOp {
    Gate {
        gate: GateKind,
        angle: Option<f64>,
        qubits: Vec<usize>,
    },
    Barrier {
        qubits: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatCircuit {
    pub qubit_count: usize,
    pub ops: Vec<FlatOp>,
}

impl FlatCircuit {
    pub fn gates(&self) -> impl Iterator<Item = (GateKind, Option<f64>, &[usize])> + '_ {
        self.ops.iter().filter_map(|op| match op {
            FlatOp::Gate { gate, angle, qubits } => Some((*gate, *angle, qubits.as_slice())),
            FlatOp::Barrier { .. } => None,
        })
    }

    pub fn gate_count(&self) -> usize {
        self.gates().count()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IngestError {
    #[error("line {line}, column {column}: unsupported construct: {what}")]
    UnsupportedConstruct { line: usize, column: usize, what: String },
    #[error("line {line}, column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("circuit needs {needed} qubits but the architecture places {available}")]
    TooManyQubits { needed: usize, available: usize },
}

impl IngestError {
    pub fn name(&self) -> &'static str {
        match self {
            IngestError::UnsupportedConstruct { .. } => "UnsupportedConstruct",
            IngestError::SyntaxError { .. } => "SyntaxError",
            IngestError::TooManyQubits { .. } => "TooManyQubits",
        }
    }
}

impl From<LexError> for IngestError {
    fn from(e: LexError) -> Self {
        IngestError::SyntaxError {
            line: e.line,
            column: e.column,
            message: e.message,
        }
    }
}

fn unsupported(at: &Token<'_>, what: impl Into<String>) -> IngestError {
    IngestError::UnsupportedConstruct {
        line: at.line,
        column: at.column,
        what: what.into(),
    }
}

enum Pending {
    Gate(GateKind, Option<f64>, Vec<usize>),
    Barrier(Option<Vec<usize>>),
}

struct Register<'a> {
    name: Option<&'a str>,
    size: Option<usize>,
    max_seen: Option<usize>,
}

impl<'a> Register<'a> {
    fn check(&mut self, at: &Token<'a>, name: &'a str, index: u64) -> Result<usize, IngestError> {
        match self.name {
            Some(n) if n != name => return Err(unsupported(at, "more than one quantum register")),
            Some(_) => {}
            None => self.name = Some(name),
        }
        let index = usize::try_from(index).unwrap_or(usize::MAX);
        if self.size.is_some_and(|size| index >= size) {
            return Err(IngestError::SyntaxError {
                line: at.line,
                column: at.column,
                message: alloc::format!("qubit index {index} is outside register `{name}`"),
            });
        }
        self.max_seen = Some(self.max_seen.map_or(index, |m| m.max(index)));
        Ok(index)
    }
}

/// Parses the restricted QASM subset.
pub fn parse_flat_qasm(document: &str) -> Result<FlatCircuit, IngestError> {
    let mut tokens = Vec::new();
    for (i, line) in document.lines().enumerate() {
        tokens.extend(tokenize_line(line, i + 1)?);
    }

    let mut reg = Register {
        name: None,
        size: None,
        max_seen: None,
    };
    let mut pending = Vec::new();
    let mut rest: &[Token<'_>] = &tokens;
    while let Some(first) = rest.first().copied() {
        let Some(semi) = rest.iter().position(|t| t.tok == Tok::Semi) else {
            let last = rest[rest.len() - 1];
            return Err(IngestError::SyntaxError {
                line: last.line,
                column: last.column,
                message: "statement is missing its terminating `;`".into(),
            });
        };
        let (stmt, tail) = rest.split_at(semi);
        rest = &tail[1..];
        let stmt_end = (tail[0].line, tail[0].column);
        let mut ts = Tokens::new(stmt, stmt_end);
        let keyword = ts.ident()?;
        match keyword {
            "OPENQASM" => match ts.next().map(|t| t.tok) {
                Some(Tok::Number(v)) if v.split('.').next() == Some("2") => {}
                _ => return Err(unsupported(&first, "only OPENQASM 2.x is accepted")),
            },
            "include" => match ts.next().map(|t| t.tok) {
                Some(Tok::Str("qelib1.inc")) => {}
                Some(Tok::Str(other)) => return Err(unsupported(&first, alloc::format!("include of \"{other}\""))),
                _ => return Err(ts.unexpected("file name").into()),
            },
            "qreg" => {
                if reg.size.is_some() {
                    return Err(unsupported(&first, "more than one quantum register"));
                }
                let (name, size) = ts.indexed()?;
                if reg.name.is_some_and(|n| n != name) {
                    return Err(unsupported(&first, "more than one quantum register"));
                }
                let size = usize::try_from(size).map_err(|_| ts.error("register too large"))?;
                if reg.max_seen.is_some_and(|m| m >= size) {
                    return Err(ts.error("register declared smaller than an earlier use").into());
                }
                reg.name = Some(name);
                reg.size = Some(size);
            }
            "creg" => return Err(unsupported(&first, "classical registers")),
            "measure" => return Err(unsupported(&first, "measurement")),
            "reset" | "if" | "gate" | "opaque" => {
                return Err(unsupported(&first, alloc::format!("`{keyword}` statements")))
            }
            "barrier" => {
                let mut qubits = Vec::new();
                let mut whole = false;
                loop {
                    let at = *ts.peek().ok_or_else(|| ts.unexpected("qubit"))?;
                    let name = ts.ident()?;
                    if ts.peek().map(|t| t.tok) == Some(Tok::LBracket) {
                        ts.expect(Tok::LBracket)?;
                        let index = ts.uint()?;
                        ts.expect(Tok::RBracket)?;
                        qubits.push(reg.check(&at, name, index)?);
                    } else {
                        match reg.name {
                            Some(n) if n != name => return Err(unsupported(&at, "more than one quantum register")),
                            _ => reg.name = Some(name),
                        }
                        whole = true;
                    }
                    if !ts.eat(Tok::Comma) {
                        break;
                    }
                }
                pending.push(Pending::Barrier(if whole { None } else { Some(qubits) }));
            }
            name => {
                let Some(gate) = GateKind::from_name(name) else {
                    return Err(unsupported(&first, alloc::format!("non-native gate `{name}`")));
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
                if angles.len() != usize::from(gate.takes_angle()) {
                    return Err(IngestError::SyntaxError {
                        line: first.line,
                        column: first.column,
                        message: alloc::format!(
                            "`{name}` takes {} angle(s), found {}",
                            usize::from(gate.takes_angle()),
                            angles.len()
                        ),
                    });
                }
                let mut qubits = Vec::new();
                loop {
                    let at = *ts.peek().ok_or_else(|| ts.unexpected("qubit"))?;
                    let (reg_name, index) = ts.indexed()?;
                    let q = reg.check(&at, reg_name, index)?;
                    if qubits.contains(&q) {
                        return Err(IngestError::SyntaxError {
                            line: at.line,
                            column: at.column,
                            message: alloc::format!("qubit {q} used twice by `{name}`"),
                        });
                    }
                    qubits.push(q);
                    if !ts.eat(Tok::Comma) {
                        break;
                    }
                }
                if qubits.len() != gate.arity() {
                    return Err(IngestError::SyntaxError {
                        line: first.line,
                        column: first.column,
                        message: alloc::format!("`{name}` takes {} qubit(s), found {}", gate.arity(), qubits.len()),
                    });
                }
                pending.push(Pending::Gate(gate, angles.first().copied(), qubits));
            }
        }
        if !ts.is_empty() {
            return Err(ts.unexpected("`;`").into());
        }
    }

    let qubit_count = reg.size.unwrap_or_else(|| reg.max_seen.map_or(0, |m| m + 1));
    let ops = pending
        .into_iter()
        .map(|p| match p {
            Pending::Gate(gate, angle, qubits) => FlatOp::Gate { gate, angle, qubits },
            Pending::Barrier(qubits) => FlatOp::Barrier {
                qubits: qubits.unwrap_or_else(|| (0..qubit_count).collect()),
            },
        })
        .collect();
    Ok(FlatCircuit { qubit_count, ops })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Packing {
    /// Every gate gets a stage of its own.
    OnePerStage,
    /// Each gate goes to the earliest stage after its last dependency.
    #[default]
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown packing `{0}` (expected one-per-stage or greedy)")]
pub struct UnknownPacking(pub String);

impl FromStr for Packing {
    type Err = UnknownPacking;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "one-per-stage" => Ok(Packing::OnePerStage),
            "greedy" => Ok(Packing::Greedy),
            _ => Err(UnknownPacking(s.into())),
        }
    }
}

/// Occupied cells of `spec` in row-major order.
pub fn row_major_cells(spec: &ArchitectureSpec) -> Vec<Cell> {
    let mut cells: Vec<Cell> = spec
        .qubits
        .iter()
        .map(|q| Cell::from_coordinates(q.x, q.y, spec.grid_side))
        .collect();
    cells.sort_unstable();
    cells
}

/// Places the circuit on the grid and groups its gates into stages.
pub fn to_rsqasm(c: &FlatCircuit, spec: &ArchitectureSpec, packing: Packing) -> Result<Program, IngestError> {
    let cells = row_major_cells(spec);
    if c.qubit_count > cells.len() {
        return Err(IngestError::TooManyQubits {
            needed: c.qubit_count,
            available: cells.len(),
        });
    }
    let instruction =
        |gate, angle, qubits: &[usize]| Instruction::gate(gate, angle, qubits.iter().map(|&q| cells[q]).collect());

    let mut stages: Vec<Vec<Instruction>> = Vec::new();
    match packing {
        Packing::OnePerStage => {
            stages.extend(c.gates().map(|(g, a, q)| alloc::vec![instruction(g, a, q)]));
        }
        Packing::Greedy => {
            // Index of the last stage each qubit is busy in.
            let mut last: Vec<Option<usize>> = alloc::vec![None; c.qubit_count];
            for op in &c.ops {
                match op {
                    FlatOp::Gate { gate, angle, qubits } => {
                        let level = qubits.iter().filter_map(|&q| last[q]).max().map_or(0, |l| l + 1);
                        if level == stages.len() {
                            stages.push(Vec::new());
                        }
                        stages[level].push(instruction(*gate, *angle, qubits));
                        for &q in qubits {
                            last[q] = Some(level);
                        }
                    }
                    FlatOp::Barrier { qubits } => {
                        let fence = qubits.iter().filter_map(|&q| last[q]).max();
                        if fence.is_some() {
                            for &q in qubits {
                                last[q] = fence;
                            }
                        }
                    }
                }
            }
        }
    }
    let stages = stages
        .into_iter()
        .map(|ops| Stage::new(ops).expect("packed stages are non-empty and disjoint"))
        .collect();
    Ok(Program::new(stages))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsqasm::serialize_program;

    fn gates(src: &str) -> usize {
        parse_flat_qasm(src).unwrap().gate_count()
    }

    #[test]
    fn barrier_is_not_a_gate() {
        let c = parse_flat_qasm("cz q[1], q[2];\nbarrier q[1], q[2];\n").unwrap();
        assert_eq!(c.gate_count(), 1);
        assert_eq!(c.qubit_count, 3);
        assert_eq!(
            c.ops[1],
            FlatOp::Barrier {
                qubits: alloc::vec![1, 2]
            }
        );
    }

    #[test]
    fn empty_body() {
        assert_eq!(gates(""), 0);
        assert_eq!(gates("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\n"), 0);
        assert_eq!(parse_flat_qasm("OPENQASM 2.0;\nqreg q[4];").unwrap().qubit_count, 4);
    }

    #[test]
    fn unsupported_constructs() {
        for src in [
            "measure q[0] -> c[0];",
            "qreg q[2];\ncreg c[2];",
            "include \"other.inc\";",
            "qreg q[2];\nqreg r[2];",
            "h q[0];\nh r[0];",
            "cx q[0], q[1];",
            "reset q[0];",
            "OPENQASM 3.0;",
        ] {
            assert!(
                matches!(parse_flat_qasm(src), Err(IngestError::UnsupportedConstruct { .. })),
                "{src}"
            );
        }
    }

    #[test]
    fn syntax_errors() {
        for src in [
            "h q[0]",
            "cz q[0];",
            "cz q[0], q[0];",
            "rz q[0];",
            "qreg q[2];\nh q[2];",
            "h q[0] q[1];",
        ] {
            assert!(
                matches!(parse_flat_qasm(src), Err(IngestError::SyntaxError { .. })),
                "{src}"
            );
        }
    }

    #[test]
    fn whole_register_barrier() {
        let c = parse_flat_qasm("qreg q[3];\nh q[0];\nbarrier q;\n").unwrap();
        assert_eq!(
            c.ops[1],
            FlatOp::Barrier {
                qubits: alloc::vec![0, 1, 2]
            }
        );
    }

    #[test]
    fn one_per_stage() {
        let c = parse_flat_qasm("h q[0];\nh q[1];\n").unwrap();
        let p = to_rsqasm(&c, &ArchitectureSpec::example_grid(50, 30), Packing::OnePerStage).unwrap();
        assert_eq!(p.stages.len(), 2);
    }

    #[test]
    fn greedy_packs_independent_gates() {
        let c = parse_flat_qasm("h q[0]; h q[1]; h q[2];").unwrap();
        let p = to_rsqasm(&c, &ArchitectureSpec::example_grid(50, 30), Packing::Greedy).unwrap();
        assert_eq!(serialize_program(&p), "RSQASM 1.0;\nh q[0];h q[1];h q[2];\n");
    }

    #[test]
    fn greedy_respects_dependencies() {
        let c = parse_flat_qasm("cz q[0], q[1]; h q[0];").unwrap();
        let p = to_rsqasm(&c, &ArchitectureSpec::example_grid(50, 30), Packing::Greedy).unwrap();
        assert_eq!(p.stages.len(), 2);
        let c = parse_flat_qasm("cz q[0], q[1]; h q[2]; h q[0]; rz(0.25) q[3];").unwrap();
        let p = to_rsqasm(&c, &ArchitectureSpec::example_grid(50, 30), Packing::Greedy).unwrap();
        assert_eq!(
            serialize_program(&p),
            "RSQASM 1.0;\ncz q[0], q[1];h q[2];rz(0.25) q[3];\nh q[0];\n"
        );
    }

    #[test]
    fn barrier_fences_greedy_packing() {
        let spec = ArchitectureSpec::example_grid(50, 30);
        let c = parse_flat_qasm("h q[0]; barrier q[0], q[1]; h q[1];").unwrap();
        assert_eq!(to_rsqasm(&c, &spec, Packing::Greedy).unwrap().stages.len(), 2);
        let c = parse_flat_qasm("h q[0]; h q[1];").unwrap();
        assert_eq!(to_rsqasm(&c, &spec, Packing::Greedy).unwrap().stages.len(), 1);
    }

    #[test]
    fn placement_follows_row_major_cells() {
        let mut spec = ArchitectureSpec::example_grid(10, 0);
        spec.qubits = [(3, 1), (0, 0), (5, 0)]
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| crate::arch::QubitPlacement { id: i as u32, x, y })
            .collect();
        let c = parse_flat_qasm("cz q[0], q[2];").unwrap();
        let p = to_rsqasm(&c, &spec, Packing::Greedy).unwrap();
        assert_eq!(serialize_program(&p), "RSQASM 1.0;\ncz q[0], q[13];\n");
    }

    #[test]
    fn too_many_qubits() {
        let c = parse_flat_qasm("qreg q[5];").unwrap();
        assert_eq!(
            to_rsqasm(&c, &ArchitectureSpec::example_grid(50, 3), Packing::Greedy),
            Err(IngestError::TooManyQubits {
                needed: 5,
                available: 3
            })
        );
    }
}
