//! Square trap grid and its occupancy state machine.
//!
//! Cells are numbered row-major from the top-left corner, so cell
//! `c = y·side + x`. A stage is executed atomically: every legality check is
//! made against the occupancy at stage start, and all of its moves take
//! effect together.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::arch::ArchitectureSpec;
use crate::rsqasm::{Instruction, Program, Stage};

/// Index of a trap in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell(pub usize);

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Cell {
    /// `(x, y)` on a grid with the given side length.
    pub fn coordinates(self, side: u32) -> (usize, usize) {
        let side = side as usize;
        (self.0 % side, self.0 / side)
    }

    pub fn from_coordinates(x: u32, y: u32, side: u32) -> Self {
        Cell(y as usize * side as usize + x as usize)
    }
}

/// Identity of a physical atom, taken from the architecture's qubit ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomId(pub u32);

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("cell {cell} is outside the {side}x{side} grid")]
pub struct CellOutOfRange {
    pub cell: Cell,
    pub side: u32,
}

/// Euclidean distance between two cells in cell units.
pub fn cell_distance(a: Cell, b: Cell, side: u32) -> Result<f64, CellOutOfRange> {
    let cells = side as usize * side as usize;
    for cell in [a, b] {
        if cell.0 >= cells {
            return Err(CellOutOfRange { cell, side });
        }
    }
    let (ax, ay) = a.coordinates(side);
    let (bx, by) = b.coordinates(side);
    let dx = ax.abs_diff(bx) as f64;
    let dy = ay.abs_diff(by) as f64;
    Ok(libm::sqrt(dx * dx + dy * dy))
}

/// Occupancy map from cells to atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridState {
    side: u32,
    occupancy: BTreeMap<Cell, AtomId>,
}

/// Placement of every qubit in `spec`.
pub fn initial_state(spec: &ArchitectureSpec) -> GridState {
    GridState {
        side: spec.grid_side,
        occupancy: spec
            .qubits
            .iter()
            .map(|q| (Cell::from_coordinates(q.x, q.y, spec.grid_side), AtomId(q.id)))
            .collect(),
    }
}

impl GridState {
    pub fn empty(side: u32) -> Self {
        GridState {
            side,
            occupancy: BTreeMap::new(),
        }
    }

    /// Builds a state from explicit `(cell, atom)` pairs. Returns `None` when a
    /// cell is out of range or a cell or atom appears twice.
    pub fn from_occupancy(side: u32, atoms: impl IntoIterator<Item = (Cell, AtomId)>) -> Option<Self> {
        let mut state = GridState::empty(side);
        let mut seen = alloc::collections::BTreeSet::new();
        for (cell, atom) in atoms {
            if !state.in_range(cell) || !seen.insert(atom) || state.occupancy.insert(cell, atom).is_some() {
                return None;
            }
        }
        Some(state)
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    pub fn cell_count(&self) -> usize {
        self.side as usize * self.side as usize
    }

    pub fn in_range(&self, cell: Cell) -> bool {
        cell.0 < self.cell_count()
    }

    pub fn atom_at(&self, cell: Cell) -> Option<AtomId> {
        self.occupancy.get(&cell).copied()
    }

    pub fn is_occupied(&self, cell: Cell) -> bool {
        self.occupancy.contains_key(&cell)
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.len()
    }

    /// Occupied cells in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = (Cell, AtomId)> + '_ {
        self.occupancy.iter().map(|(&c, &a)| (c, a))
    }

    /// Where each atom currently sits.
    pub fn positions(&self) -> BTreeMap<AtomId, Cell> {
        self.iter().map(|(c, a)| (a, c)).collect()
    }

    /// Applies a stage in place, leaving `self` untouched if it is illegal.
    pub fn apply(&mut self, stage: &Stage) -> Result<(), IllegalStage> {
        let diagnosis = validate_stage(self, stage);
        if !diagnosis.is_legal() {
            return Err(IllegalStage { diagnosis });
        }
        let moved: Vec<(Cell, AtomId)> = stage
            .moves()
            .map(|(src, dst)| (dst, self.occupancy.remove(&src).expect("validated source")))
            .collect();
        self.occupancy.extend(moved);
        Ok(())
    }
}

/// A single legality violation found by [`validate_stage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    GateOnEmptyCell(Cell),
    MoveFromEmptyCell(Cell),
    MoveToOccupiedCell(Cell),
    CellOutOfRange(Cell),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::GateOnEmptyCell(c) => write!(f, "gate on empty cell {c}"),
            Violation::MoveFromEmptyCell(c) => write!(f, "move from empty cell {c}"),
            Violation::MoveToOccupiedCell(c) => write!(f, "move to occupied cell {c}"),
            Violation::CellOutOfRange(c) => write!(f, "cell {c} is outside the grid"),
        }
    }
}

/// Every violation of one stage, in instruction order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageDiagnosis {
    pub violations: Vec<Violation>,
}

impl StageDiagnosis {
    pub fn is_legal(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for StageDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("illegal stage: {diagnosis}")]
pub struct IllegalStage {
    pub diagnosis: StageDiagnosis,
}

/// Checks a stage against the occupancy at stage start.
///
/// Cell disjointness between instructions is a [`Stage`] invariant and is
/// not re-checked; cell bounds are.
pub fn validate_stage(state: &GridState, stage: &Stage) -> StageDiagnosis {
    let mut violations = Vec::new();
    for op in stage.ops() {
        match op {
            Instruction::Gate { operands, .. } => {
                for &cell in operands {
                    if !state.in_range(cell) {
                        violations.push(Violation::CellOutOfRange(cell));
                    } else if !state.is_occupied(cell) {
                        violations.push(Violation::GateOnEmptyCell(cell));
                    }
                }
            }
            &Instruction::Move { src, dst } => {
                if !state.in_range(src) {
                    violations.push(Violation::CellOutOfRange(src));
                } else if !state.is_occupied(src) {
                    violations.push(Violation::MoveFromEmptyCell(src));
                }
                if !state.in_range(dst) {
                    violations.push(Violation::CellOutOfRange(dst));
                } else if state.is_occupied(dst) {
                    violations.push(Violation::MoveToOccupiedCell(dst));
                }
            }
        }
    }
    StageDiagnosis { violations }
}

/// Returns the state after executing `stage`.
pub fn apply_stage(state: &GridState, stage: &Stage) -> Result<GridState, IllegalStage> {
    let mut next = state.clone();
    next.apply(stage)?;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("stage {stage}: {diagnosis}")]
pub struct SimulationError {
    /// Zero-based stage index.
    pub stage: usize,
    pub diagnosis: StageDiagnosis,
}

/// Runs the whole program from `initial`, returning the final state.
pub fn simulate(program: &Program, initial: &GridState) -> Result<GridState, SimulationError> {
    let mut state = initial.clone();
    for (stage_index, stage) in program.stages.iter().enumerate() {
        state.apply(stage).map_err(|e| SimulationError {
            stage: stage_index,
            diagnosis: e.diagnosis,
        })?;
    }
    Ok(state)
}

/// `cz` operand pairs of `stage` that lie farther apart than `radius` cells.
///
/// The evaluator does not enforce an interaction radius; this exists for
/// advisory warnings only.
pub fn cz_beyond_radius(stage: &Stage, side: u32, radius: f64) -> Vec<(Cell, Cell, f64)> {
    stage
        .ops()
        .iter()
        .filter_map(|op| match op {
            Instruction::Gate { operands, .. } if operands.len() == 2 => {
                let (a, b) = (operands[0], operands[1]);
                let d = cell_distance(a, b, side).ok()?;
                (d > radius).then_some((a, b, d))
            }
            _ => None,
        })
        .collect()
}
