//! Random legal programs for property tests.
//!
//! Programs are built from raw "picks" interpreted against the simulated
//! occupancy, so every generated program is legal by construction and
//! proptest can still shrink the picks.

#![allow(dead_code)]

use std::collections::BTreeSet;

use na_evalkit_core::eval::{evaluate_unified, UnifiedAccumulator};
use na_evalkit_core::grid::{self, Cell, GridState};
use na_evalkit_core::models::evaluate_hybridmapper;
use na_evalkit_core::normalize::collapse;
use na_evalkit_core::{ArchitectureSpec, GateKind, Instruction, Program, QubitPlacement, Stage};
use proptest::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct Pick {
    pub kind: u8,
    pub a: usize,
    pub b: usize,
    pub angle: i16,
}

#[derive(Debug, Clone)]
pub enum Segment {
    Random(Vec<Pick>),
    /// `a -> b`, unrelated stages, then `b -> a` or `b -> c`.
    Pattern {
        a: usize,
        b: usize,
        c: Option<usize>,
        gap: Vec<Vec<Pick>>,
    },
}

pub fn pick() -> impl Strategy<Value = Pick> {
    (0u8..8, any::<usize>(), any::<usize>(), any::<i16>()).prop_map(|(kind, a, b, angle)| Pick { kind, a, b, angle })
}

pub fn picks() -> impl Strategy<Value = Vec<Pick>> {
    prop::collection::vec(pick(), 1..6)
}

/// Architecture with scattered placements on a small grid.
pub fn arch() -> impl Strategy<Value = ArchitectureSpec> {
    (2u32..=7)
        .prop_flat_map(|side| {
            let cells = (side * side) as usize;
            (
                Just(side),
                prop::sample::subsequence((0..cells).collect::<Vec<_>>(), 1..=cells.min(14)),
            )
        })
        .prop_map(|(side, cells)| {
            let mut spec = ArchitectureSpec::example_grid(side, 0);
            spec.qubits = cells
                .into_iter()
                .enumerate()
                .map(|(id, c)| QubitPlacement {
                    id: id as u32 * 3 + 1,
                    x: (c % side as usize) as u32,
                    y: (c / side as usize) as u32,
                })
                .collect();
            spec
        })
}

pub fn segments(max: usize) -> impl Strategy<Value = Vec<Segment>> {
    let segment = prop_oneof![
        3 => picks().prop_map(Segment::Random),
        1 => (any::<usize>(), any::<usize>(), prop::option::of(any::<usize>()), prop::collection::vec(picks(), 0..3))
            .prop_map(|(a, b, c, gap)| Segment::Pattern { a, b, c, gap }),
    ];
    prop::collection::vec(segment, 0..max)
}

/// A spec together with a legal program on it.
pub fn legal_program(max_segments: usize) -> impl Strategy<Value = (ArchitectureSpec, Program)> {
    (arch(), segments(max_segments)).prop_map(|(spec, segs)| {
        let p = build(&spec, &segs);
        (spec, p)
    })
}

pub struct Builder {
    pub side: u32,
    pub state: GridState,
    pub stages: Vec<Stage>,
}

fn choose(v: &[Cell], i: usize) -> Option<Cell> {
    (!v.is_empty()).then(|| v[i % v.len()])
}

impl Builder {
    pub fn new(spec: &ArchitectureSpec) -> Self {
        Builder {
            side: spec.grid_side,
            state: grid::initial_state(spec),
            stages: Vec::new(),
        }
    }

    fn cells(&self, occupied: bool, used: &BTreeSet<Cell>) -> Vec<Cell> {
        (0..self.state.cell_count())
            .map(Cell)
            .filter(|c| self.state.is_occupied(*c) == occupied && !used.contains(c))
            .collect()
    }

    pub fn push(&mut self, ops: Vec<Instruction>) {
        if ops.is_empty() {
            return;
        }
        let stage = Stage::new(ops).expect("builder keeps cells disjoint");
        self.state.apply(&stage).expect("builder emits legal stages");
        self.stages.push(stage);
    }

    /// One stage from picks, never touching `avoid`.
    pub fn random_stage(&mut self, picks: &[Pick], avoid: &BTreeSet<Cell>) {
        let mut used = avoid.clone();
        let mut ops = Vec::new();
        for p in picks {
            let full = self.cells(true, &used);
            let op = match p.kind {
                0..=2 => choose(&full, p.a).map(|c| {
                    let gate = [
                        GateKind::H,
                        GateKind::S,
                        GateKind::T,
                        GateKind::Rx,
                        GateKind::Ry,
                        GateKind::Rz,
                    ][p.b % 6];
                    let angle = gate.takes_angle().then(|| f64::from(p.angle) / 1024.0);
                    Instruction::gate(gate, angle, vec![c])
                }),
                3..=4 if full.len() >= 2 => {
                    let x = full[p.a % full.len()];
                    let rest: Vec<Cell> = full.iter().copied().filter(|&c| c != x).collect();
                    Some(Instruction::gate(GateKind::Cz, None, vec![x, rest[p.b % rest.len()]]))
                }
                _ => {
                    let empty = self.cells(false, &used);
                    match (choose(&full, p.a), choose(&empty, p.b)) {
                        (Some(s), Some(d)) => Some(Instruction::mv(s, d)),
                        _ => None,
                    }
                }
            };
            if let Some(op) = op {
                used.extend(op.cells());
                ops.push(op);
            }
        }
        self.push(ops);
    }

    pub fn segment(&mut self, seg: &Segment) {
        match seg {
            Segment::Random(p) => self.random_stage(p, &BTreeSet::new()),
            Segment::Pattern { a, b, c, gap } => {
                let none = BTreeSet::new();
                let (Some(a), Some(b)) = (
                    choose(&self.cells(true, &none), *a),
                    choose(&self.cells(false, &none), *b),
                ) else {
                    return;
                };
                self.push(vec![Instruction::mv(a, b)]);
                let avoid: BTreeSet<Cell> = [a, b].into();
                for p in gap {
                    self.random_stage(p, &avoid);
                }
                let dst = match c {
                    None => Some(a),
                    Some(c) => choose(&self.cells(false, &avoid), *c),
                };
                if let Some(dst) = dst {
                    self.push(vec![Instruction::mv(b, dst)]);
                }
            }
        }
    }
}

pub fn build(spec: &ArchitectureSpec, segs: &[Segment]) -> Program {
    let mut b = Builder::new(spec);
    for s in segs {
        b.segment(s);
    }
    Program::new(b.stages)
}

/// Relative closeness for accumulated floating point values.
pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

// Property bodies, shared with the acceptance target.

/// Atom count and atom identities never change along a legal program.
pub fn check_occupancy(spec: &ArchitectureSpec, p: &Program) -> Result<(), TestCaseError> {
    let mut state = grid::initial_state(spec);
    let atoms: BTreeSet<_> = state.positions().into_keys().collect();
    for stage in &p.stages {
        state = grid::apply_stage(&state, stage).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(state.occupied_count(), atoms.len());
        prop_assert_eq!(&state.positions().into_keys().collect::<BTreeSet<_>>(), &atoms);
    }
    Ok(())
}

/// Factors stay in (0, 1] and none grows when a stage is appended.
pub fn check_asp_monotone(spec: &ArchitectureSpec, p: &Program) -> Result<(), TestCaseError> {
    let mut prefix = Program::new(Vec::new());
    let mut prev = evaluate_unified(&prefix, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(prev.asp, 1.0);
    for stage in &p.stages {
        prefix.stages.push(stage.clone());
        let next = evaluate_unified(&prefix, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (f, before) in [
            (next.f_decoherence, prev.f_decoherence),
            (next.f_gates, prev.f_gates),
            (next.f_movements, prev.f_movements),
            (next.asp, prev.asp),
        ] {
            prop_assert!(f > 0.0 && f <= 1.0, "factor {} out of range", f);
            prop_assert!(f <= before, "factor grew from {} to {}", before, f);
        }
        if !stage.has_gate() {
            prop_assert_eq!(next.f_gates, prev.f_gates);
        }
        if !stage.has_move() {
            prop_assert_eq!(next.f_movements, prev.f_movements);
        }
        prev = next;
    }
    Ok(())
}

/// Collapsing keeps the final placement, never adds cost and is idempotent.
pub fn check_normalize(spec: &ArchitectureSpec, p: &Program) -> Result<(), TestCaseError> {
    let initial = grid::initial_state(spec);
    let before = grid::simulate(p, &initial).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let (q, r) = collapse(p, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let after = grid::simulate(&q, &initial).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(before.positions(), after.positions());
    prop_assert_eq!(r.moves_before, p.move_count());
    prop_assert_eq!(r.moves_after, q.move_count());
    prop_assert!(r.moves_after <= r.moves_before);
    prop_assert!(r.distance_after <= r.distance_before + 1e-9);
    prop_assert!(r.saved_distance >= -1e-9);
    prop_assert_eq!(q.gate_count(), p.gate_count());
    prop_assert!(q.stages.iter().all(|s| !s.is_empty()));
    let (q2, r2) = collapse(&q, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(&q2, &q);
    prop_assert!(r2.rewrites_applied.is_empty());
    Ok(())
}

/// Feeding stages one at a time matches whole-program evaluation.
pub fn check_incremental(spec: &ArchitectureSpec, p: &Program) -> Result<(), TestCaseError> {
    let batch = evaluate_unified(p, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut acc = UnifiedAccumulator::new(spec);
    for stage in &p.stages {
        acc.push(stage).map_err(|e| TestCaseError::fail(e.to_string()))?;
    }
    let inc = acc.breakdown().map_err(|e| TestCaseError::fail(e.to_string()))?;
    for (name, a, b) in [
        ("f_decoherence", inc.f_decoherence, batch.f_decoherence),
        ("f_gates", inc.f_gates, batch.f_gates),
        ("f_movements", inc.f_movements, batch.f_movements),
        ("asp", inc.asp, batch.asp),
        ("t_total", inc.t_total, batch.t_total),
        ("t_idle", inc.t_idle, batch.t_idle),
        ("distance", inc.total_move_distance, batch.total_move_distance),
    ] {
        prop_assert!(close(a, b), "{}: incremental {} vs batch {}", name, a, b);
    }
    prop_assert_eq!(
        (inc.gate_count, inc.move_count, inc.stage_count),
        (batch.gate_count, batch.move_count, batch.stage_count)
    );
    prop_assert_eq!(acc.state(), &grid::simulate(p, &grid::initial_state(spec)).unwrap());
    Ok(())
}

/// Counting transfers as operations can only shrink idle time.
pub fn check_hybrid_decoherence(spec: &ArchitectureSpec, p: &Program) -> Result<(), TestCaseError> {
    let u = evaluate_unified(p, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let h = evaluate_hybridmapper(p, spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(
        h.f_decoherence >= u.f_decoherence,
        "{} < {}",
        h.f_decoherence,
        u.f_decoherence
    );
    prop_assert!(h.t_idle <= u.t_idle);
    prop_assert_eq!(h.f_gates, u.f_gates);
    Ok(())
}
