//! Collapsing of shuttling that is redundant at the RSQASM level.
//!
//! Two rewrites are applied, earliest candidate first, until none applies:
//!
//! - **R1, reversal**: `a→b` at stage `i` and `b→a` at stage `j > i` with no
//!   instruction in between touching `a` or `b`. Both moves are dropped.
//! - **R2, path**: `a→b` at stage `i` and `b→c` (`c ≠ a`) at stage `j > i`
//!   under the same condition. The pair becomes `a→c` at stage `j`; the atom
//!   simply waits on `a` until then.
//!
//! Stages left empty are removed. Every rewrite is checked by simulating the
//! rewritten program; one that would change legality or the final placement
//! is skipped and reported instead.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::arch::ArchitectureSpec;
use crate::grid::{self, AtomId, Cell, SimulationError};
use crate::rsqasm::{Instruction, Program, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Reversal,
    Path,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Reversal => "R1",
            Rule::Path => "R2",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// One rewrite, with zero-based stage indices into the input program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rewrite {
    pub rule: Rule,
    pub first_stage: usize,
    pub second_stage: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationReport {
    pub moves_before: usize,
    pub moves_after: usize,
    /// Cell units.
    pub distance_before: f64,
    pub distance_after: f64,
    pub saved_distance: f64,
    pub rewrites_applied: Vec<Rewrite>,
    /// Candidates rejected because the rewritten program failed verification.
    pub rewrites_skipped: Vec<Rewrite>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("input program is not executable: {0}")]
    IllegalInput(#[from] SimulationError),
}

impl NormalizeError {
    pub fn name(&self) -> &'static str {
        match self {
            NormalizeError::IllegalInput(_) => "IllegalInput",
        }
    }
}

type Slot = (usize, usize);

/// Mutable view of a program where deletion leaves a hole, so positions and
/// stage indices stay stable while rewriting.
#[derive(Clone)]
struct Work {
    stages: Vec<Vec<Option<Instruction>>>,
    /// Live positions referencing each cell, in program order.
    by_cell: BTreeMap<Cell, BTreeSet<Slot>>,
}

impl Work {
    fn new(p: &Program) -> Self {
        let stages: Vec<Vec<Option<Instruction>>> = p
            .stages
            .iter()
            .map(|s| s.ops().iter().cloned().map(Some).collect())
            .collect();
        let mut by_cell: BTreeMap<Cell, BTreeSet<Slot>> = BTreeMap::new();
        for (i, stage) in stages.iter().enumerate() {
            for (k, op) in stage.iter().enumerate() {
                for cell in op.iter().flat_map(Instruction::cells) {
                    by_cell.entry(cell).or_default().insert((i, k));
                }
            }
        }
        Work { stages, by_cell }
    }

    fn get(&self, (i, k): Slot) -> Option<&Instruction> {
        self.stages[i][k].as_ref()
    }

    fn unindex(&mut self, slot: Slot, cell: Cell) {
        if let Some(set) = self.by_cell.get_mut(&cell) {
            set.remove(&slot);
        }
    }

    fn delete(&mut self, slot: Slot) {
        if let Some(op) = self.stages[slot.0][slot.1].take() {
            for cell in op.cells() {
                self.unindex(slot, cell);
            }
        }
    }

    fn replace(&mut self, slot: Slot, op: Instruction) {
        self.delete(slot);
        for cell in op.cells() {
            self.by_cell.entry(cell).or_default().insert(slot);
        }
        self.stages[slot.0][slot.1] = Some(op);
    }

    /// Live positions after stage `after` that reference `cell`, earliest first.
    fn later_refs(&self, cell: Cell, after: usize) -> impl Iterator<Item = Slot> + '_ {
        self.by_cell
            .get(&cell)
            .into_iter()
            .flat_map(move |set| set.range((after + 1, 0)..).copied())
    }

    fn moves(&self) -> impl Iterator<Item = (Slot, Cell, Cell)> + '_ {
        self.stages.iter().enumerate().flat_map(|(i, stage)| {
            stage.iter().enumerate().filter_map(move |(k, op)| match op {
                Some(Instruction::Move { src, dst }) => Some(((i, k), *src, *dst)),
                _ => None,
            })
        })
    }

    fn to_program(&self, like: &Program) -> Option<Program> {
        let stages = self
            .stages
            .iter()
            .filter(|s| s.iter().any(Option::is_some))
            .map(|s| Stage::new(s.iter().flatten().cloned().collect()).ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Program {
            version_major: like.version_major,
            version_minor: like.version_minor,
            stages,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    rule: Rule,
    first: Slot,
    second: Slot,
    from: Cell,
    to: Cell,
}

/// The earliest move that has a partner under R1 or R2 and was not skipped.
fn next_candidate(work: &Work, skipped: &BTreeSet<(Slot, Slot)>) -> Option<Candidate> {
    for (first, a, b) in work.moves() {
        let stage = first.0;
        let next_a = work.later_refs(a, stage).next();
        let next_b = work.later_refs(b, stage).next();
        let partner_stage = match (next_a, next_b) {
            (None, None) => continue,
            (Some(x), None) | (None, Some(x)) => x.0,
            (Some(x), Some(y)) => x.0.min(y.0),
        };
        // Every instruction of the partner stage that touches a or b.
        let touching: BTreeSet<Slot> = work
            .later_refs(a, stage)
            .take_while(|s| s.0 == partner_stage)
            .chain(work.later_refs(b, stage).take_while(|s| s.0 == partner_stage))
            .collect();
        if touching.len() != 1 {
            continue;
        }
        let second = *touching.first()?;
        let Some(&Instruction::Move { src, dst }) = work.get(second) else {
            continue;
        };
        if src != b || skipped.contains(&(first, second)) {
            continue;
        }
        let rule = if dst == a { Rule::Reversal } else { Rule::Path };
        return Some(Candidate {
            rule,
            first,
            second,
            from: a,
            to: dst,
        });
    }
    None
}

fn apply(work: &mut Work, c: &Candidate) {
    work.delete(c.first);
    match c.rule {
        Rule::Reversal => work.delete(c.second),
        Rule::Path => work.replace(c.second, Instruction::mv(c.from, c.to)),
    }
}

fn move_stats(p: &Program, side: u32) -> (usize, f64) {
    p.instructions()
        .filter_map(|op| match *op {
            Instruction::Move { src, dst } => grid::cell_distance(src, dst, side).ok(),
            _ => None,
        })
        .fold((0, 0.0), |(n, d), x| (n + 1, d + x))
}

/// Final cell of every atom, or `None` if the program cannot run.
fn final_positions(p: &Program, initial: &grid::GridState) -> Option<BTreeMap<AtomId, Cell>> {
    grid::simulate(p, initial).ok().map(|s| s.positions())
}

/// Removes redundant moves from a program that is legal under `spec`.
///
/// The result is legal, leaves every atom where the input leaves it, and
/// never has more moves or travel distance than the input.
pub fn collapse(p: &Program, spec: &ArchitectureSpec) -> Result<(Program, NormalizationReport), NormalizeError> {
    let initial = grid::initial_state(spec);
    let target = grid::simulate(p, &initial)?.positions();
    let (moves_before, distance_before) = move_stats(p, spec.grid_side);

    let mut work = Work::new(p);
    let mut skipped = BTreeSet::new();
    let mut rewrites_applied = Vec::new();
    let mut rewrites_skipped = Vec::new();

    while let Some(candidate) = next_candidate(&work, &skipped) {
        let rewrite = Rewrite {
            rule: candidate.rule,
            first_stage: candidate.first.0,
            second_stage: candidate.second.0,
        };
        let mut trial = work.clone();
        apply(&mut trial, &candidate);
        let ok = trial
            .to_program(p)
            .and_then(|q| final_positions(&q, &initial))
            .is_some_and(|pos| pos == target);
        if ok {
            work = trial;
            rewrites_applied.push(rewrite);
        } else {
            skipped.insert((candidate.first, candidate.second));
            rewrites_skipped.push(rewrite);
        }
    }

    let out = work
        .to_program(p)
        .expect("every kept rewrite was verified to produce valid stages");
    let (moves_after, distance_after) = move_stats(&out, spec.grid_side);
    let report = NormalizationReport {
        moves_before,
        moves_after,
        distance_before,
        distance_after,
        saved_distance: (distance_before - distance_after).max(0.0),
        rewrites_applied,
        rewrites_skipped,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::QubitPlacement;
    use crate::rsqasm::{parse_program, serialize_program};

    fn spec_with(cells: &[u32]) -> ArchitectureSpec {
        let mut spec = ArchitectureSpec::example_grid(50, 0);
        spec.qubits = cells
            .iter()
            .enumerate()
            .map(|(i, &c)| QubitPlacement {
                id: i as u32,
                x: c % 50,
                y: c / 50,
            })
            .collect();
        spec
    }

    fn run(cells: &[u32], body: &str) -> (String, NormalizationReport) {
        let p = parse_program(&alloc::format!("RSQASM 1.0;\n{body}")).unwrap();
        let (q, report) = collapse(&p, &spec_with(cells)).unwrap();
        (serialize_program(&q), report)
    }

    use alloc::string::String;

    #[test]
    fn immediate_reversal() {
        let (out, r) = run(
            &[1033, 1034],
            "cz q[1034], q[1033];\nmove q[1034], q[1028];\nmove q[1028], q[1034];\nh q[1034];\n",
        );
        assert_eq!(out, "RSQASM 1.0;\ncz q[1034], q[1033];\nh q[1034];\n");
        assert_eq!((r.moves_before, r.moves_after), (2, 2 - 2));
        assert_eq!(r.distance_before, 12.0);
        assert_eq!(r.saved_distance, 12.0);
        assert_eq!(
            r.rewrites_applied,
            [Rewrite {
                rule: Rule::Reversal,
                first_stage: 1,
                second_stage: 2
            }]
        );
    }

    #[test]
    fn intermediate_cell() {
        let (out, r) = run(
            &[1028, 1033, 1034, 1201],
            "cz q[1034], q[1033];\nmove q[1034], q[865];\nmove q[865], q[1029];\nmove q[1201], q[1034];\nh q[1028];\n",
        );
        assert_eq!(
            out,
            "RSQASM 1.0;\ncz q[1034], q[1033];\nmove q[1034], q[1029];\nmove q[1201], q[1034];\nh q[1028];\n"
        );
        assert_eq!((r.moves_before, r.moves_after), (3, 2));
        assert_eq!(r.rewrites_applied[0].rule, Rule::Path);
        assert!(r.saved_distance > 0.0);
    }

    #[test]
    fn nested_patterns() {
        let (out, r) = run(
            &[1028, 1029, 1033, 1034],
            "cz q[1029], q[1028];cz q[1034], q[1033];\nmove q[1034], q[1201];\nmove q[1029], q[865];\nmove q[865], q[1029];\nmove q[1201], q[1034];\nh q[1029];\n",
        );
        assert_eq!(
            out,
            "RSQASM 1.0;\ncz q[1029], q[1028];cz q[1034], q[1033];\nh q[1029];\n"
        );
        assert_eq!((r.moves_before, r.moves_after), (4, 0));
        assert_eq!(r.rewrites_applied.len(), 2);
    }

    #[test]
    fn nothing_to_do() {
        let body = "cz q[0], q[1];\nmove q[0], q[60];\ncz q[60], q[2];\n";
        let (out, r) = run(&[0, 1, 2], body);
        assert_eq!(out, alloc::format!("RSQASM 1.0;\n{body}"));
        assert_eq!(r.saved_distance, 0.0);
        assert_eq!(r.moves_before, r.moves_after);
        assert!(r.rewrites_applied.is_empty());
    }

    #[test]
    fn intervening_reference_blocks_collapse() {
        // The gate on 60 sits between the two moves.
        let body = "move q[0], q[60];\nh q[60];\nmove q[60], q[0];\n";
        let (_, r) = run(&[0], body);
        assert_eq!(r.moves_after, 2);
    }

    #[test]
    fn vacated_source_reused_blocks_path() {
        // After 0 -> 60, another atom moves into 0 in the same stage that
        // 60 -> 61 happens; merging would chain through cell 0.
        let body = "move q[0], q[60];\nmove q[60], q[61];move q[1], q[0];\n";
        let (out, r) = run(&[0, 1], body);
        assert_eq!(out, alloc::format!("RSQASM 1.0;\n{body}"));
        assert_eq!(r.moves_after, 3);
    }

    #[test]
    fn chained_paths_collapse_fully() {
        let (out, r) = run(
            &[0],
            "move q[0], q[1];\nmove q[1], q[2];\nmove q[2], q[3];\nmove q[3], q[0];\n",
        );
        assert_eq!(out, "RSQASM 1.0;\n");
        assert_eq!(r.moves_after, 0);
        assert_eq!(r.distance_before, 6.0);
        assert_eq!(r.distance_after, 0.0);
    }

    #[test]
    fn illegal_input_is_rejected() {
        let p = parse_program("RSQASM 1.0;\nmove q[5], q[6];\n").unwrap();
        assert!(matches!(
            collapse(&p, &spec_with(&[0])),
            Err(NormalizeError::IllegalInput(_))
        ));
    }

    #[test]
    fn collapse_is_idempotent_here() {
        let p = parse_program("RSQASM 1.0;\nmove q[0], q[5];move q[1], q[6];\nmove q[5], q[7];\nmove q[6], q[1];\n")
            .unwrap();
        let spec = spec_with(&[0, 1]);
        let (once, _) = collapse(&p, &spec).unwrap();
        let (twice, r) = collapse(&once, &spec).unwrap();
        assert_eq!(once, twice);
        assert!(r.rewrites_applied.is_empty());
        assert_eq!(serialize_program(&once), "RSQASM 1.0;\nmove q[0], q[7];\n");
    }
}
