//! Compiler-agnostic fidelity model.
//!
//! ```text
//! P        = F_decoh · F_gates · F_moves
//! F_decoh  = exp(−t_idle / T_eff)        T_eff  = T1·T2 / (T1 + T2)
//! F_gates  = Π f_g over executed gates   t_idle = n·T − Σ t_g
//! F_moves  = f_trans^(2·s)               s      = number of moves
//! ```
//!
//! `T` is the sum of stage durations, a stage lasting as long as its longest
//! instruction. A move takes `2·t_trans + D/υ` with `D` the Euclidean cell
//! distance scaled by the inter-qubit spacing. Move time is never subtracted
//! from idle time, and each gate's duration is subtracted once regardless of
//! its operand count.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::arch::ArchitectureSpec;
use crate::gate::{GateKind, GateTable};
use crate::grid::{self, AtomId, CellOutOfRange, GridState, SimulationError};
use crate::models::ModelSelector;
use crate::rsqasm::{Instruction, Program, Stage};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    IllegalStage(#[from] SimulationError),
    #[error(transparent)]
    CellOutOfRange(#[from] CellOutOfRange),
    #[error("total idle time {t_idle} µs is negative")]
    NegativeIdleTime { t_idle: f64 },
    #[error("atom {atom} idles {idle} µs, which is not below T2 = {t2} µs")]
    CoherenceBudgetExceeded { atom: AtomId, idle: f64, t2: f64 },
    #[error("{0}")]
    InvalidInput(&'static str),
}

impl EvalError {
    /// Stable identifier used in diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            EvalError::IllegalStage(_) => "IllegalStage",
            EvalError::CellOutOfRange(_) => "CellOutOfRange",
            EvalError::NegativeIdleTime { .. } => "NegativeIdleTime",
            EvalError::CoherenceBudgetExceeded { .. } => "CoherenceBudgetExceeded",
            EvalError::InvalidInput(_) => "InvalidInput",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Gates,
    Moves,
    Mixed,
}

impl StageKind {
    fn of(stage: &Stage) -> Self {
        match (stage.has_gate(), stage.has_move()) {
            (true, true) => StageKind::Mixed,
            (false, true) => StageKind::Moves,
            _ => StageKind::Gates,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTiming {
    /// Longest instruction in the stage, µs.
    pub duration: f64,
    pub kind: StageKind,
}

/// Per-circuit metrics. Times in µs, distances in cell units.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityBreakdown {
    pub model: ModelSelector,
    pub f_decoherence: f64,
    pub f_gates: f64,
    pub f_movements: f64,
    /// Product of the three factors.
    pub asp: f64,
    pub t_total: f64,
    pub t_idle: f64,
    pub gate_count: usize,
    pub one_qubit_gate_count: usize,
    pub two_qubit_gate_count: usize,
    pub move_count: usize,
    pub total_move_distance: f64,
    pub stage_count: usize,
    /// Time each placed atom spends inside gates.
    pub busy_time: BTreeMap<AtomId, f64>,
}

impl FidelityBreakdown {
    pub(crate) fn from_factors(
        model: ModelSelector,
        profile: &ExecutionProfile,
        t_total: f64,
        t_idle: f64,
        f_decoherence: f64,
        f_gates: f64,
        f_movements: f64,
    ) -> Self {
        FidelityBreakdown {
            model,
            f_decoherence,
            f_gates,
            f_movements,
            asp: f_decoherence * f_gates * f_movements,
            t_total,
            t_idle,
            gate_count: profile.gate_count(),
            one_qubit_gate_count: profile.one_qubit_gate_count(),
            two_qubit_gate_count: profile.two_qubit_gate_count(),
            move_count: profile.move_count(),
            total_move_distance: profile.stages.iter().map(|s| s.move_distance_sum).sum(),
            stage_count: profile.stages.len(),
            busy_time: profile.busy_time.clone(),
        }
    }

    /// Neutral result for a program with no stages.
    pub fn identity(model: ModelSelector, qubits: impl IntoIterator<Item = AtomId>) -> Self {
        FidelityBreakdown {
            model,
            f_decoherence: 1.0,
            f_gates: 1.0,
            f_movements: 1.0,
            asp: 1.0,
            t_total: 0.0,
            t_idle: 0.0,
            gate_count: 0,
            one_qubit_gate_count: 0,
            two_qubit_gate_count: 0,
            move_count: 0,
            total_move_distance: 0.0,
            stage_count: 0,
            busy_time: qubits.into_iter().map(|a| (a, 0.0)).collect(),
        }
    }
}

/// Duration of one move over `distance` cells under the linear travel model.
pub fn move_duration(distance: f64, spec: &ArchitectureSpec) -> f64 {
    2.0 * spec.aod_transfer_time + distance * spec.inter_qubit_distance / spec.move_speed
}

/// Duration of a single instruction, µs.
pub fn instruction_duration(i: &Instruction, spec: &ArchitectureSpec) -> Result<f64, EvalError> {
    match *i {
        Instruction::Gate { gate, .. } => Ok(spec.gate_times.get(gate)),
        Instruction::Move { src, dst } => {
            let d = grid::cell_distance(src, dst, spec.grid_side)?;
            Ok(move_duration(d, spec))
        }
    }
}

/// Total run time and per-stage timings. The program must be executable from
/// the spec's initial placement.
pub fn total_runtime(p: &Program, spec: &ArchitectureSpec) -> Result<(f64, Vec<StageTiming>), EvalError> {
    grid::simulate(p, &grid::initial_state(spec))?;
    let mut timings = Vec::with_capacity(p.stages.len());
    for stage in &p.stages {
        let mut duration = 0.0f64;
        for op in stage.ops() {
            duration = duration.max(instruction_duration(op, spec)?);
        }
        timings.push(StageTiming {
            duration,
            kind: StageKind::of(stage),
        });
    }
    Ok((timings.iter().map(|t| t.duration).sum(), timings))
}

/// What a stage contains, independent of any timing model.
#[derive(Debug, Clone, PartialEq)]
pub struct StageProfile {
    pub gate_counts: GateTable<usize>,
    /// Longest gate in the stage, if it has any gates.
    pub max_gate_time: Option<f64>,
    pub gate_time_sum: f64,
    pub move_count: usize,
    /// Longest move in cell units, if the stage has any moves.
    pub max_move_distance: Option<f64>,
    pub move_distance_sum: f64,
}

impl StageProfile {
    pub fn has_gate(&self) -> bool {
        self.max_gate_time.is_some()
    }

    /// Stage duration with moves timed by `move_time(distance_in_cells)`.
    pub fn duration(&self, move_time: impl Fn(f64) -> f64) -> f64 {
        let gates = self.max_gate_time.unwrap_or(0.0);
        let moves = self.max_move_distance.map_or(0.0, move_time);
        gates.max(moves)
    }
}

/// A legal program reduced to the quantities the fidelity models consume.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionProfile {
    pub qubit_count: usize,
    pub stages: Vec<StageProfile>,
    /// Gate participation time per placed atom, µs.
    pub busy_time: BTreeMap<AtomId, f64>,
}

impl ExecutionProfile {
    /// Simulates `p` from the spec's initial placement and records each stage.
    pub fn build(p: &Program, spec: &ArchitectureSpec) -> Result<Self, EvalError> {
        let mut state = grid::initial_state(spec);
        let mut busy_time: BTreeMap<AtomId, f64> = state.iter().map(|(_, a)| (a, 0.0)).collect();
        let mut stages = Vec::with_capacity(p.stages.len());
        for (index, stage) in p.stages.iter().enumerate() {
            let mut profile = StageProfile {
                gate_counts: GateTable::splat(0),
                max_gate_time: None,
                gate_time_sum: 0.0,
                move_count: 0,
                max_move_distance: None,
                move_distance_sum: 0.0,
            };
            // Validate first so operand cells are known to hold atoms.
            let diagnosis = grid::validate_stage(&state, stage);
            if !diagnosis.is_legal() {
                return Err(SimulationError {
                    stage: index,
                    diagnosis,
                }
                .into());
            }
            for op in stage.ops() {
                match *op {
                    Instruction::Gate { gate, ref operands, .. } => {
                        let t = spec.gate_times.get(gate);
                        profile.gate_counts.set(gate, profile.gate_counts.get(gate) + 1);
                        profile.max_gate_time = Some(profile.max_gate_time.map_or(t, |m| m.max(t)));
                        profile.gate_time_sum += t;
                        for &cell in operands {
                            if let Some(atom) = state.atom_at(cell) {
                                *busy_time.entry(atom).or_insert(0.0) += t;
                            }
                        }
                    }
                    Instruction::Move { src, dst } => {
                        let d = grid::cell_distance(src, dst, spec.grid_side)?;
                        profile.move_count += 1;
                        profile.max_move_distance = Some(profile.max_move_distance.map_or(d, |m| m.max(d)));
                        profile.move_distance_sum += d;
                    }
                }
            }
            state.apply(stage).map_err(|e| SimulationError {
                stage: index,
                diagnosis: e.diagnosis,
            })?;
            stages.push(profile);
        }
        Ok(ExecutionProfile {
            qubit_count: spec.qubit_count(),
            stages,
            busy_time,
        })
    }

    pub fn count(&self, gate: GateKind) -> usize {
        self.stages.iter().map(|s| s.gate_counts.get(gate)).sum()
    }

    pub fn gate_count(&self) -> usize {
        GateKind::ALL.into_iter().map(|g| self.count(g)).sum()
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        GateKind::ALL
            .into_iter()
            .filter(|g| g.is_two_qubit())
            .map(|g| self.count(g))
            .sum()
    }

    pub fn one_qubit_gate_count(&self) -> usize {
        self.gate_count() - self.two_qubit_gate_count()
    }

    pub fn move_count(&self) -> usize {
        self.stages.iter().map(|s| s.move_count).sum()
    }

    pub fn gate_time_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.gate_time_sum).sum()
    }

    /// Product of gate fidelities over every executed gate.
    pub fn gate_fidelity_product(&self, spec: &ArchitectureSpec) -> f64 {
        GateKind::ALL
            .into_iter()
            .map(|g| powu(spec.gate_fidelities.get(g), self.count(g)))
            .product()
    }

    /// Sum of stage durations with moves timed by `move_time(cells)`.
    pub fn run_time(&self, move_time: impl Fn(f64) -> f64) -> f64 {
        self.stages.iter().map(|s| s.duration(&move_time)).sum()
    }
}

pub(crate) fn powu(base: f64, exp: usize) -> f64 {
    libm::pow(base, exp as f64)
}

/// Rejects a negative idle time, absorbing rounding noise around zero.
pub(crate) fn checked_idle(t_idle: f64, scale: f64) -> Result<f64, EvalError> {
    if t_idle >= 0.0 {
        Ok(t_idle)
    } else if t_idle >= -1e-9 * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(EvalError::NegativeIdleTime { t_idle })
    }
}

/// Evaluates `p` under the unified model.
pub fn evaluate_unified(p: &Program, spec: &ArchitectureSpec) -> Result<FidelityBreakdown, EvalError> {
    let profile = ExecutionProfile::build(p, spec)?;
    unified_from_profile(&profile, spec)
}

pub(crate) fn unified_from_profile(
    profile: &ExecutionProfile,
    spec: &ArchitectureSpec,
) -> Result<FidelityBreakdown, EvalError> {
    let t_total = profile.run_time(|d| move_duration(d, spec));
    let busy = profile.qubit_count as f64 * t_total;
    let t_idle = checked_idle(busy - profile.gate_time_sum(), busy)?;
    Ok(FidelityBreakdown::from_factors(
        ModelSelector::Unified,
        profile,
        t_total,
        t_idle,
        libm::exp(-t_idle / spec.effective_coherence_time()),
        profile.gate_fidelity_product(spec),
        powu(spec.transfer_fidelity, 2 * profile.move_count()),
    ))
}

/// Stage-at-a-time evaluation under the unified model.
///
/// Feeding every stage of a program and calling [`UnifiedAccumulator::breakdown`]
/// gives the same result as [`evaluate_unified`]; a breakdown can be taken
/// after any prefix.
#[derive(Debug, Clone)]
pub struct UnifiedAccumulator<'a> {
    spec: &'a ArchitectureSpec,
    state: GridState,
    stages: usize,
    t_total: f64,
    gate_time_sum: f64,
    f_gates: f64,
    one_qubit: usize,
    two_qubit: usize,
    moves: usize,
    move_distance: f64,
    busy_time: BTreeMap<AtomId, f64>,
}

impl<'a> UnifiedAccumulator<'a> {
    pub fn new(spec: &'a ArchitectureSpec) -> Self {
        let state = grid::initial_state(spec);
        let busy_time = state.iter().map(|(_, a)| (a, 0.0)).collect();
        UnifiedAccumulator {
            spec,
            state,
            stages: 0,
            t_total: 0.0,
            gate_time_sum: 0.0,
            f_gates: 1.0,
            one_qubit: 0,
            two_qubit: 0,
            moves: 0,
            move_distance: 0.0,
            busy_time,
        }
    }

    /// Executes one more stage. On error the accumulator is unchanged.
    pub fn push(&mut self, stage: &Stage) -> Result<(), EvalError> {
        let next = grid::apply_stage(&self.state, stage).map_err(|e| SimulationError {
            stage: self.stages,
            diagnosis: e.diagnosis,
        })?;
        let mut duration = 0.0f64;
        for op in stage.ops() {
            duration = duration.max(instruction_duration(op, self.spec)?);
        }
        for op in stage.ops() {
            match op {
                Instruction::Gate { gate, operands, .. } => {
                    let t = self.spec.gate_times.get(*gate);
                    self.gate_time_sum += t;
                    self.f_gates *= self.spec.gate_fidelities.get(*gate);
                    if gate.is_two_qubit() {
                        self.two_qubit += 1;
                    } else {
                        self.one_qubit += 1;
                    }
                    for atom in operands.iter().filter_map(|&c| self.state.atom_at(c)) {
                        *self.busy_time.entry(atom).or_insert(0.0) += t;
                    }
                }
                &Instruction::Move { src, dst } => {
                    self.moves += 1;
                    self.move_distance += grid::cell_distance(src, dst, self.spec.grid_side)?;
                }
            }
        }
        self.t_total += duration;
        self.stages += 1;
        self.state = next;
        Ok(())
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn breakdown(&self) -> Result<FidelityBreakdown, EvalError> {
        let busy = self.spec.qubit_count() as f64 * self.t_total;
        let t_idle = checked_idle(busy - self.gate_time_sum, busy)?;
        let f_decoherence = libm::exp(-t_idle / self.spec.effective_coherence_time());
        let mut f_movements = 1.0;
        for _ in 0..self.moves {
            f_movements *= self.spec.transfer_fidelity * self.spec.transfer_fidelity;
        }
        Ok(FidelityBreakdown {
            model: ModelSelector::Unified,
            f_decoherence,
            f_gates: self.f_gates,
            f_movements,
            asp: f_decoherence * self.f_gates * f_movements,
            t_total: self.t_total,
            t_idle,
            gate_count: self.one_qubit + self.two_qubit,
            one_qubit_gate_count: self.one_qubit,
            two_qubit_gate_count: self.two_qubit,
            move_count: self.moves,
            total_move_distance: self.move_distance,
            stage_count: self.stages,
            busy_time: self.busy_time.clone(),
        })
    }
}
