//! Unified hardware description.
//!
//! The document layout is
//!
//! ```json
//! {
//!   "schema": 1,
//!   "properties": { "nRows_nColumns_grid_side_size": 50, "interQubitDistance": 1.0 },
//!   "parameters": {
//!     "Qubits": [ { "id": 0, "x": 0, "y": 0 } ],
//!     "gateTimes":      { "cz": 0.2, "rx": 2.0, "ry": 2.0, "rz": 2.0, "h": 2.0, "s": 2.0, "t": 2.0 },
//!     "gateFidelities": { "cz": 0.9996, "rx": 0.9999, "...": 0.9999 },
//!     "shuttlingTimesSpeed": { "move_speed": 0.55, "aod_activate_deactivate_time": 20.0 },
//!     "shuttlingFidelities": { "aod_activate_deactivate": 0.9999 },
//!     "decoherenceTimes": { "t1": 100000000.0, "t2": 1500000.0 },
//!     "excitementFidelity": 1.0
//!   }
//! }
//! ```
//!
//! Times are in microseconds, lengths in micrometers. `excitementFidelity` is
//! optional and defaults to 1. Keys that are not recognised are reported as
//! warnings and otherwise ignored.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde_json::{Map, Number, Value};

use crate::gate::{GateKind, GateTable};

/// The only schema version understood by this crate.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitPlacement {
    pub id: u32,
    /// Column, counted from the left edge.
    pub x: u32,
    /// Row, counted downwards from the top edge.
    pub y: u32,
}

/// Parsed and validated hardware description.
///
/// Immutable once constructed; every invariant is checked by
/// [`parse_architecture`] and [`ArchitectureSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureSpec {
    pub schema: u64,
    pub grid_side: u32,
    /// Spacing between orthogonally adjacent cells, µm.
    pub inter_qubit_distance: f64,
    pub qubits: Vec<QubitPlacement>,
    /// Gate durations, µs.
    pub gate_times: GateTable<f64>,
    pub gate_fidelities: GateTable<f64>,
    /// Shuttling speed, µm/µs.
    pub move_speed: f64,
    /// Duration of one SLM↔AOD activation or deactivation, µs.
    pub aod_transfer_time: f64,
    /// Fidelity of one SLM↔AOD transition.
    pub transfer_fidelity: f64,
    pub t1: f64,
    pub t2: f64,
    pub excitement_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ArchError {
    #[error("malformed architecture document: {0}")]
    MalformedDocument(String),
    #[error("unsupported schema version {found} at `schema` (expected {SCHEMA_VERSION})")]
    SchemaMismatch { found: String },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("invalid value at `{path}`: {reason}")]
    InvalidValue { path: String, reason: String },
}

impl ArchError {
    pub fn name(&self) -> &'static str {
        match self {
            ArchError::MalformedDocument(_) => "MalformedDocument",
            ArchError::SchemaMismatch { .. } => "SchemaMismatch",
            ArchError::MissingField(_) => "MissingField",
            ArchError::InvalidValue { .. } => "InvalidValue",
        }
    }
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ArchError {
    ArchError::InvalidValue {
        path: path.into(),
        reason: reason.into(),
    }
}

/// A parsed spec together with the unrecognised keys that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedArchitecture {
    pub spec: ArchitectureSpec,
    /// Dotted paths of ignored keys, in document order.
    pub warnings: Vec<String>,
}

/// Parses and validates an architecture document.
pub fn parse_architecture(document: &str) -> Result<ArchitectureSpec, ArchError> {
    parse_architecture_with_warnings(document).map(|p| p.spec)
}

pub fn parse_architecture_with_warnings(document: &str) -> Result<ParsedArchitecture, ArchError> {
    let root: Value = serde_json::from_str(document).map_err(|e| ArchError::MalformedDocument(format!("{e}")))?;
    let mut warnings = Vec::new();
    let root = Obj::new(&root, String::new())?;
    root.warn_unknown(&["schema", "properties", "parameters"], &mut warnings);

    let schema = root.required("schema")?;
    let schema = match schema.as_u64() {
        Some(v) if v == SCHEMA_VERSION => v,
        _ => {
            return Err(ArchError::SchemaMismatch {
                found: format!("{schema}"),
            })
        }
    };

    let props = root.object("properties")?;
    props.warn_unknown(&["nRows_nColumns_grid_side_size", "interQubitDistance"], &mut warnings);
    let grid_side = props.u32("nRows_nColumns_grid_side_size")?;
    let inter_qubit_distance = props.f64("interQubitDistance")?;

    let params = root.object("parameters")?;
    params.warn_unknown(
        &[
            "Qubits",
            "gateTimes",
            "gateFidelities",
            "shuttlingTimesSpeed",
            "shuttlingFidelities",
            "decoherenceTimes",
            "excitementFidelity",
        ],
        &mut warnings,
    );

    let qubits_path = params.child_path("Qubits");
    let qubits = match params.required("Qubits")? {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let q = Obj::new(item, format!("{qubits_path}[{i}]"))?;
                q.warn_unknown(&["id", "x", "y"], &mut warnings);
                Ok(QubitPlacement {
                    id: q.u32("id")?,
                    x: q.u32("x")?,
                    y: q.u32("y")?,
                })
            })
            .collect::<Result<Vec<_>, ArchError>>()?,
        _ => return Err(invalid(qubits_path, "expected an array")),
    };

    let gate_times = params.gate_table("gateTimes", &mut warnings)?;
    let gate_fidelities = params.gate_table("gateFidelities", &mut warnings)?;

    let shuttle = params.object("shuttlingTimesSpeed")?;
    shuttle.warn_unknown(&["move_speed", "aod_activate_deactivate_time"], &mut warnings);
    let move_speed = shuttle.f64("move_speed")?;
    let aod_transfer_time = shuttle.f64("aod_activate_deactivate_time")?;

    let shuttle_fid = params.object("shuttlingFidelities")?;
    shuttle_fid.warn_unknown(&["aod_activate_deactivate"], &mut warnings);
    let transfer_fidelity = shuttle_fid.f64("aod_activate_deactivate")?;

    let decoherence = params.object("decoherenceTimes")?;
    decoherence.warn_unknown(&["t1", "t2"], &mut warnings);
    let t1 = decoherence.f64("t1")?;
    let t2 = decoherence.f64("t2")?;

    let excitement_fidelity = match params.get("excitementFidelity") {
        Some(_) => params.f64("excitementFidelity")?,
        None => 1.0,
    };

    let spec = ArchitectureSpec {
        schema,
        grid_side,
        inter_qubit_distance,
        qubits,
        gate_times,
        gate_fidelities,
        move_speed,
        aod_transfer_time,
        transfer_fidelity,
        t1,
        t2,
        excitement_fidelity,
    };
    spec.validate()?;
    Ok(ParsedArchitecture { spec, warnings })
}

/// Borrowed JSON object plus the dotted path that leads to it.
struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn new(value: &'a Value, path: String) -> Result<Self, ArchError> {
        match value {
            Value::Object(map) => Ok(Obj { map, path }),
            _ => Err(invalid(
                if path.is_empty() { "<root>".to_owned() } else { path },
                "expected an object",
            )),
        }
    }

    fn child_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_owned()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn required(&self, key: &str) -> Result<&'a Value, ArchError> {
        self.get(key)
            .ok_or_else(|| ArchError::MissingField(self.child_path(key)))
    }

    fn object(&self, key: &str) -> Result<Obj<'a>, ArchError> {
        Obj::new(self.required(key)?, self.child_path(key))
    }

    fn f64(&self, key: &str) -> Result<f64, ArchError> {
        match self.required(key)? {
            Value::Number(n) => n
                .as_f64()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(self.child_path(key), "expected a finite number")),
            _ => Err(invalid(self.child_path(key), "expected a number")),
        }
    }

    fn u32(&self, key: &str) -> Result<u32, ArchError> {
        let v = self.required(key)?;
        v.as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| invalid(self.child_path(key), "expected an integer in 0..=4294967295"))
    }

    fn gate_table(&self, key: &str, warnings: &mut Vec<String>) -> Result<GateTable<f64>, ArchError> {
        let obj = self.object(key)?;
        let names: Vec<&str> = GateKind::ALL.iter().map(|g| g.name()).collect();
        obj.warn_unknown(&names, warnings);
        let mut table = GateTable::splat(0.0);
        for gate in GateKind::ALL {
            table.set(gate, obj.f64(gate.name())?);
        }
        Ok(table)
    }

    fn warn_unknown(&self, known: &[&str], warnings: &mut Vec<String>) {
        warnings.extend(
            self.map
                .keys()
                .filter(|k| !known.contains(&k.as_str()))
                .map(|k| self.child_path(k)),
        );
    }
}

impl ArchitectureSpec {
    /// Checks every invariant; parsing calls this, and so should code that
    /// builds a spec by hand.
    pub fn validate(&self) -> Result<(), ArchError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ArchError::SchemaMismatch {
                found: format!("{}", self.schema),
            });
        }
        if self.grid_side == 0 {
            return Err(invalid(
                "properties.nRows_nColumns_grid_side_size",
                "must be at least 1",
            ));
        }
        if (self.grid_side as u64)
            .checked_mul(self.grid_side as u64)
            .and_then(|n| usize::try_from(n).ok())
            .is_none()
        {
            return Err(invalid(
                "properties.nRows_nColumns_grid_side_size",
                "grid has more cells than this platform can index",
            ));
        }
        positive("properties.interQubitDistance", self.inter_qubit_distance)?;
        positive("parameters.shuttlingTimesSpeed.move_speed", self.move_speed)?;
        non_negative(
            "parameters.shuttlingTimesSpeed.aod_activate_deactivate_time",
            self.aod_transfer_time,
        )?;
        positive("parameters.decoherenceTimes.t1", self.t1)?;
        positive("parameters.decoherenceTimes.t2", self.t2)?;
        fidelity(
            "parameters.shuttlingFidelities.aod_activate_deactivate",
            self.transfer_fidelity,
        )?;
        fidelity("parameters.excitementFidelity", self.excitement_fidelity)?;
        for (gate, t) in self.gate_times.iter() {
            non_negative(&format!("parameters.gateTimes.{gate}"), t)?;
        }
        for (gate, f) in self.gate_fidelities.iter() {
            fidelity(&format!("parameters.gateFidelities.{gate}"), f)?;
        }

        let mut ids = BTreeSet::new();
        let mut positions = BTreeSet::new();
        for (i, q) in self.qubits.iter().enumerate() {
            let path = format!("parameters.Qubits[{i}]");
            if q.x >= self.grid_side || q.y >= self.grid_side {
                let side = self.grid_side;
                return Err(invalid(
                    path,
                    format!("({}, {}) lies outside the {side}x{side} grid", q.x, q.y),
                ));
            }
            if !ids.insert(q.id) {
                return Err(invalid(format!("{path}.id"), format!("duplicate qubit id {}", q.id)));
            }
            if !positions.insert((q.x, q.y)) {
                return Err(invalid(
                    path,
                    format!("position ({}, {}) is already occupied", q.x, q.y),
                ));
            }
        }
        Ok(())
    }

    /// Number of placed qubits.
    pub fn qubit_count(&self) -> usize {
        self.qubits.len()
    }

    /// Number of cells in the grid.
    pub fn cell_count(&self) -> usize {
        self.grid_side as usize * self.grid_side as usize
    }

    /// `T1·T2 / (T1 + T2)`, µs.
    pub fn effective_coherence_time(&self) -> f64 {
        effective_coherence_time(self.t1, self.t2)
    }

    /// Serializes back to the document format. Keys come out sorted.
    pub fn to_json_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("schema".into(), Value::from(self.schema));

        let mut props = Map::new();
        props.insert("nRows_nColumns_grid_side_size".into(), Value::from(self.grid_side));
        props.insert("interQubitDistance".into(), num(self.inter_qubit_distance));
        root.insert("properties".into(), Value::Object(props));

        let mut params = Map::new();
        params.insert(
            "Qubits".into(),
            Value::Array(
                self.qubits
                    .iter()
                    .map(|q| {
                        let mut m = Map::new();
                        m.insert("id".into(), Value::from(q.id));
                        m.insert("x".into(), Value::from(q.x));
                        m.insert("y".into(), Value::from(q.y));
                        Value::Object(m)
                    })
                    .collect(),
            ),
        );
        let table = |t: &GateTable<f64>| Value::Object(t.iter().map(|(g, v)| (g.name().into(), num(v))).collect());
        params.insert("gateTimes".into(), table(&self.gate_times));
        params.insert("gateFidelities".into(), table(&self.gate_fidelities));

        let mut shuttle = Map::new();
        shuttle.insert("move_speed".into(), num(self.move_speed));
        shuttle.insert("aod_activate_deactivate_time".into(), num(self.aod_transfer_time));
        params.insert("shuttlingTimesSpeed".into(), Value::Object(shuttle));

        let mut shuttle_fid = Map::new();
        shuttle_fid.insert("aod_activate_deactivate".into(), num(self.transfer_fidelity));
        params.insert("shuttlingFidelities".into(), Value::Object(shuttle_fid));

        let mut decoherence = Map::new();
        decoherence.insert("t1".into(), num(self.t1));
        decoherence.insert("t2".into(), num(self.t2));
        params.insert("decoherenceTimes".into(), Value::Object(decoherence));
        params.insert("excitementFidelity".into(), num(self.excitement_fidelity));

        root.insert("parameters".into(), Value::Object(params));
        Value::Object(root)
    }

    /// Pretty-printed JSON document.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value())
            .unwrap_or_else(|_| unreachable!("a Value always serializes"));
        s.push('\n');
        s
    }

    /// The reference hardware parameters on a `side`×`side` grid with
    /// `qubits` atoms placed in row-major order from the top-left corner.
    ///
    /// # Panics
    ///
    /// If the qubits do not fit on the grid.
    pub fn example_grid(side: u32, qubits: u32) -> Self {
        assert!(
            (qubits as u64) <= side as u64 * side as u64,
            "{qubits} qubits do not fit on a {side}x{side} grid"
        );
        let mut gate_times = GateTable::splat(2.0);
        gate_times.set(GateKind::Cz, 0.2);
        let mut gate_fidelities = GateTable::splat(0.9999);
        gate_fidelities.set(GateKind::Cz, 0.9996);
        ArchitectureSpec {
            schema: SCHEMA_VERSION,
            grid_side: side,
            inter_qubit_distance: 1.0,
            qubits: (0..qubits)
                .map(|id| QubitPlacement {
                    id,
                    x: id % side,
                    y: id / side,
                })
                .collect(),
            gate_times,
            gate_fidelities,
            move_speed: 0.55,
            aod_transfer_time: 20.0,
            transfer_fidelity: 0.9999,
            t1: 1e8,
            t2: 1.5e6,
            excitement_fidelity: 1.0,
        }
    }
}

/// `T1·T2 / (T1 + T2)`.
pub fn effective_coherence_time(t1: f64, t2: f64) -> f64 {
    t1 * t2 / (t1 + t2)
}

fn num(v: f64) -> Value {
    Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn positive(path: &str, v: f64) -> Result<(), ArchError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} is not positive")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<(), ArchError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} is negative")))
    }
}

fn fidelity(path: &str, v: f64) -> Result<(), ArchError> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(invalid(path, format!("fidelity {v} is outside (0, 1]")))
    }
}
