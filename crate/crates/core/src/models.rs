//! Success-probability arithmetic of three existing neutral-atom compilers,
//! re-evaluated over the same program and hardware description as the
//! unified model.
//!
//! None of these reproduce the compilers' mapping or routing; only the
//! metric formulas are applied to an already compiled circuit.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::arch::ArchitectureSpec;
use crate::eval::{self, checked_idle, move_duration, powu, EvalError, ExecutionProfile, FidelityBreakdown};
use crate::gate::GateKind;
use crate::rsqasm::Program;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelSelector {
    Unified,
    HybridMapper,
    DasAtom,
    Enola,
}

impl ModelSelector {
    pub const ALL: [ModelSelector; 4] = [
        ModelSelector::Unified,
        ModelSelector::HybridMapper,
        ModelSelector::DasAtom,
        ModelSelector::Enola,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            ModelSelector::Unified => "unified",
            ModelSelector::HybridMapper => "hybridmapper",
            ModelSelector::DasAtom => "dasatom",
            ModelSelector::Enola => "enola",
        }
    }

    pub fn evaluate(self, p: &Program, spec: &ArchitectureSpec) -> Result<FidelityBreakdown, EvalError> {
        match self {
            ModelSelector::Unified => eval::evaluate_unified(p, spec),
            ModelSelector::HybridMapper => evaluate_hybridmapper(p, spec),
            ModelSelector::DasAtom => evaluate_dasatom(p, spec),
            ModelSelector::Enola => evaluate_enola(p, spec),
        }
    }
}

impl fmt::Display for ModelSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown model `{0}` (expected unified, hybridmapper, dasatom or enola)")]
pub struct UnknownModel(pub String);

impl FromStr for ModelSelector {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownModel(s.into()))
    }
}

/// HybridMapper: `P = exp(−t_idle/T_eff) · Π_{o∈O} F_o`,
/// `t_idle = n·T − Σ_{o∈O} T_o`.
///
/// `O` holds every gate and both SLM↔AOD transfers of every move. Transfer
/// durations are therefore subtracted from idle time, so shuttling makes the
/// decoherence factor look better than under the unified model.
pub fn evaluate_hybridmapper(p: &Program, spec: &ArchitectureSpec) -> Result<FidelityBreakdown, EvalError> {
    let profile = ExecutionProfile::build(p, spec)?;
    let t_total = profile.run_time(|d| move_duration(d, spec));
    let busy = profile.qubit_count as f64 * t_total;
    let transfers = 2 * profile.move_count();
    let operation_time = profile.gate_time_sum() + transfers as f64 * spec.aod_transfer_time;
    let t_idle = checked_idle(busy - operation_time, busy)?;
    Ok(FidelityBreakdown::from_factors(
        ModelSelector::HybridMapper,
        &profile,
        t_total,
        t_idle,
        libm::exp(-t_idle / spec.effective_coherence_time()),
        profile.gate_fidelity_product(spec),
        powu(spec.transfer_fidelity, transfers),
    ))
}

/// DasAtom: `P = exp(−t_idle/T2) · f_cz^m · f_trans^s` with
/// `T = h·t_cz + s·t_trans + D/υ` and `t_idle = n·T − m·t_cz`.
///
/// `m` counts `cz` gates, `h` counts stages that hold at least one gate,
/// `s = 2·moves` counts transfers and `D` sums the longest move of each
/// move-bearing stage. One-qubit gates contribute neither time nor fidelity.
pub fn evaluate_dasatom(p: &Program, spec: &ArchitectureSpec) -> Result<FidelityBreakdown, EvalError> {
    let profile = ExecutionProfile::build(p, spec)?;
    let t_cz = spec.gate_times.get(GateKind::Cz);
    let m = profile.count(GateKind::Cz);
    let h = profile.stages.iter().filter(|s| s.has_gate()).count();
    let s = 2 * profile.move_count();
    let d_um: f64 =
        profile.stages.iter().filter_map(|st| st.max_move_distance).sum::<f64>() * spec.inter_qubit_distance;
    let t_total = h as f64 * t_cz + s as f64 * spec.aod_transfer_time + d_um / spec.move_speed;
    let busy = profile.qubit_count as f64 * t_total;
    let t_idle = checked_idle(busy - m as f64 * t_cz, busy)?;
    Ok(FidelityBreakdown::from_factors(
        ModelSelector::DasAtom,
        &profile,
        t_total,
        t_idle,
        libm::exp(-t_idle / spec.t2),
        powu(spec.gate_fidelities.get(GateKind::Cz), m),
        powu(spec.transfer_fidelity, s),
    ))
}

/// Travel time of one AOD move over a physical distance.
pub trait TravelTime {
    /// `distance` in µm, `speed` in µm/µs; returns µs.
    fn travel_time(&self, distance: f64, speed: f64) -> f64;
}

/// `t = d/υ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearTravel;

impl TravelTime for LinearTravel {
    fn travel_time(&self, distance: f64, speed: f64) -> f64 {
        distance / speed
    }
}

/// `t = d/υ²`, the acceleration-aware form used by Enola, taken literally.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuadraticTravel;

impl TravelTime for QuadraticTravel {
    fn travel_time(&self, distance: f64, speed: f64) -> f64 {
        distance / (speed * speed)
    }
}

/// Exponent `|Q|·S − 2·g₂` of the bystander excitation factor.
pub fn excitation_exponent(qubits: usize, stages: usize, two_qubit_gates: usize) -> i64 {
    qubits as i64 * stages as i64 - 2 * two_qubit_gates as i64
}

/// Enola: `P = f_1q^g₁ · f_cz^g₂ · f_exc^(|Q|S − 2g₂) · f_trans^s · Π_q (1 − T_q/T2)`
/// with `f_1q = 1`.
///
/// `T_q = T − busy(q)` where `busy(q)` sums the gates acting on `q`. Moves
/// take `2·t_trans + d/υ²`. The decoherence factor is the first-order
/// product, which stops making sense once some `T_q ≥ T2`; that case is an
/// error.
pub fn evaluate_enola(p: &Program, spec: &ArchitectureSpec) -> Result<FidelityBreakdown, EvalError> {
    evaluate_enola_with(p, spec, &QuadraticTravel)
}

/// [`evaluate_enola`] with a replaceable travel-time model.
pub fn evaluate_enola_with(
    p: &Program,
    spec: &ArchitectureSpec,
    travel: &impl TravelTime,
) -> Result<FidelityBreakdown, EvalError> {
    let profile = ExecutionProfile::build(p, spec)?;
    let t_total = profile.run_time(|d| {
        2.0 * spec.aod_transfer_time + travel.travel_time(d * spec.inter_qubit_distance, spec.move_speed)
    });
    let mut f_decoherence = 1.0;
    let mut t_idle = 0.0;
    for (&atom, &busy) in &profile.busy_time {
        let idle = checked_idle(t_total - busy, t_total)?;
        let factor = 1.0 - idle / spec.t2;
        if factor <= 0.0 {
            return Err(EvalError::CoherenceBudgetExceeded {
                atom,
                idle,
                t2: spec.t2,
            });
        }
        f_decoherence *= factor;
        t_idle += idle;
    }
    let g2 = profile.two_qubit_gate_count();
    let exponent = excitation_exponent(profile.qubit_count, profile.stages.len(), g2);
    let f_gates =
        powu(spec.gate_fidelities.get(GateKind::Cz), g2) * libm::pow(spec.excitement_fidelity, exponent as f64);
    Ok(FidelityBreakdown::from_factors(
        ModelSelector::Enola,
        &profile,
        t_total,
        t_idle,
        f_decoherence,
        f_gates,
        powu(spec.transfer_fidelity, 2 * profile.move_count()),
    ))
}

/// Inputs for estimating the effect of collapsing redundant moves without
/// re-running the evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhatIfInput {
    /// Total idle time before collapsing, µs.
    pub old_t_idle: f64,
    /// Travel distance removed, cell units.
    pub saved_distance: f64,
    pub old_move_count: usize,
    pub new_move_count: usize,
    /// Number of qubits whose idle time shrinks.
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhatIfResult {
    /// Run time saved by the shorter travel, µs.
    pub delta_t_move: f64,
    /// Idle time saved over all qubits, µs.
    pub delta_t_idle: f64,
    pub t_idle: f64,
    pub f_decoherence: f64,
    pub f_movements: f64,
}

/// `ΔT_move = saved·spacing/υ`, `Δt_idle = n·ΔT_move`, then the unified
/// decoherence and movement factors for the reduced idle time and move count.
pub fn whatif_collapse(w: &WhatIfInput, spec: &ArchitectureSpec) -> Result<WhatIfResult, EvalError> {
    if !(w.saved_distance >= 0.0 && w.saved_distance.is_finite()) {
        return Err(EvalError::InvalidInput("saved distance must be a non-negative number"));
    }
    if !(w.old_t_idle >= 0.0 && w.old_t_idle.is_finite()) {
        return Err(EvalError::InvalidInput("old idle time must be a non-negative number"));
    }
    if w.new_move_count > w.old_move_count {
        return Err(EvalError::InvalidInput(
            "move count after collapsing exceeds the count before",
        ));
    }
    let delta_t_move = w.saved_distance * spec.inter_qubit_distance / spec.move_speed;
    let delta_t_idle = w.n as f64 * delta_t_move;
    let t_idle = w.old_t_idle - delta_t_idle;
    if t_idle < 0.0 {
        return Err(EvalError::InvalidInput("collapsed idle time would be negative"));
    }
    Ok(WhatIfResult {
        delta_t_move,
        delta_t_idle,
        t_idle,
        f_decoherence: libm::exp(-t_idle / spec.effective_coherence_time()),
        f_movements: powu(spec.transfer_fidelity, 2 * w.new_move_count),
    })
}
