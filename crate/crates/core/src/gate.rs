//! The native gate set.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

/// A gate from the native set `{cz, rx, ry, rz, h, s, t}`.
///
/// Names are lowercase and case-sensitive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    Cz,
    Rx,
    Ry,
    Rz,
    H,
    S,
    T,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::Cz,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::H,
        GateKind::S,
        GateKind::T,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            GateKind::Cz => "cz",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::T => "t",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }

    /// Number of qubit operands.
    pub const fn arity(self) -> usize {
        match self {
            GateKind::Cz => 2,
            _ => 1,
        }
    }

    /// Rotations take exactly one angle, everything else none.
    pub const fn takes_angle(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub const fn is_two_qubit(self) -> bool {
        self.arity() == 2
    }

    pub(crate) const fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{0}` is not a native gate")]
pub struct UnknownGate(pub String);

impl FromStr for GateKind {
    type Err = UnknownGate;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s).ok_or_else(|| UnknownGate(s.into()))
    }
}

/// One value per native gate, indexed by [`GateKind`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateTable<T>([T; 7]);

impl<T: Copy> GateTable<T> {
    pub const fn splat(value: T) -> Self {
        GateTable([value; 7])
    }

    pub fn get(&self, gate: GateKind) -> T {
        self.0[gate.index()]
    }

    pub fn set(&mut self, gate: GateKind, value: T) {
        self.0[gate.index()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (GateKind, T)> + '_ {
        GateKind::ALL.into_iter().map(|g| (g, self.get(g)))
    }
}
