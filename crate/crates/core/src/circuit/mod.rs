//! Circuit IR and passes.
//!
//! A [`Circuit`] is an ordered gate list over virtual qubits. Gates are the
//! Clifford generators plus single-axis rotations; a circuit is Clifford when
//! every rotation angle is a multiple of π/2. The passes here are pure
//! functions: [`cliffordize`], [`fold`], and [`pauli_twirl`].

mod generators;
mod passes;

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use generators::{
    gen_efficient_su2, gen_hamiltonian_sim, gen_mirrored_brickwork, CircuitFamily, HamSimParams,
};
pub use passes::{cliffordize, fold, pauli_twirl};

/// Angles within this distance of a multiple of π/2 count as Clifford.
pub const CLIFFORD_ANGLE_TOL: f64 = 1e-9;

/// A single gate acting on virtual qubits.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    /// Controlled-X, `(control, target)`.
    CX(usize, usize),
    RZ(usize, f64),
    RY(usize, f64),
    RX(usize, f64),
    Barrier(Vec<usize>),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "h",
            Gate::S(_) => "s",
            Gate::Sdg(_) => "sdg",
            Gate::X(_) => "x",
            Gate::Y(_) => "y",
            Gate::Z(_) => "z",
            Gate::CX(..) => "cx",
            Gate::RZ(..) => "rz",
            Gate::RY(..) => "ry",
            Gate::RX(..) => "rx",
            Gate::Barrier(_) => "barrier",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::RZ(q, _)
            | Gate::RY(q, _)
            | Gate::RX(q, _) => vec![q],
            Gate::CX(c, t) => vec![c, t],
            Gate::Barrier(ref qs) => qs.clone(),
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match *self {
            Gate::RZ(_, t) | Gate::RY(_, t) | Gate::RX(_, t) => Some(t),
            _ => None,
        }
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self, Gate::Barrier(_))
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::CX(..))
    }

    /// True for non-barrier single-qubit gates.
    pub fn is_one_qubit(&self) -> bool {
        !self.is_barrier() && !self.is_two_qubit()
    }

    /// Quarter-turn count `k` if this is a rotation by `kπ/2`.
    fn quarter_turns(theta: f64) -> Option<i64> {
        let k = (theta / FRAC_PI_2).round();
        ((theta - k * FRAC_PI_2).abs() <= CLIFFORD_ANGLE_TOL).then_some(k as i64)
    }

    pub fn is_clifford(&self) -> bool {
        self.theta().is_none_or(|t| Self::quarter_turns(t).is_some())
    }

    /// The gate whose product with this one is the identity (up to phase).
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::RZ(q, t) => Gate::RZ(q, -t),
            Gate::RY(q, t) => Gate::RY(q, -t),
            Gate::RX(q, t) => Gate::RX(q, -t),
            ref g => g.clone(),
        }
    }

    /// Decomposition into the elementary Clifford set {H, S, Sdg, X, Y, Z,
    /// CX}, equal to this gate up to global phase. `None` for non-Clifford
    /// rotations. Barriers decompose to nothing.
    pub fn clifford_decomposition(&self) -> Option<Vec<Gate>> {
        let ops = match *self {
            Gate::RZ(q, t) => match Self::quarter_turns(t)?.rem_euclid(4) {
                0 => vec![],
                1 => vec![Gate::S(q)],
                2 => vec![Gate::Z(q)],
                _ => vec![Gate::Sdg(q)],
            },
            // RX(kπ/2) = H RZ(kπ/2) H.
            Gate::RX(q, t) => match Self::quarter_turns(t)?.rem_euclid(4) {
                0 => vec![],
                1 => vec![Gate::H(q), Gate::S(q), Gate::H(q)],
                2 => vec![Gate::X(q)],
                _ => vec![Gate::H(q), Gate::Sdg(q), Gate::H(q)],
            },
            // RY(π/2) = X·H, RY(π) ~ Y, RY(3π/2) = H·X (listed in time order).
            Gate::RY(q, t) => match Self::quarter_turns(t)?.rem_euclid(4) {
                0 => vec![],
                1 => vec![Gate::H(q), Gate::X(q)],
                2 => vec![Gate::Y(q)],
                _ => vec![Gate::X(q), Gate::H(q)],
            },
            Gate::Barrier(_) => vec![],
            ref g => vec![g.clone()],
        };
        Some(ops)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs = self
            .qubits()
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",");
        match self.theta() {
            Some(t) => write!(f, "{}({t}) {qs}", self.name()),
            None => write!(f, "{} {qs}", self.name()),
        }
    }
}

/// Ordered gate program over `num_qubits` virtual qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
        }
    }

    /// Build a circuit from a gate list, validating every gate.
    pub fn from_gates(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(num_qubits);
        for g in gates {
            c.try_push(g)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn try_push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if let Some(&q) = qs.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::Validation(format!(
                "gate `{gate}` uses qubit {q} outside 0..{}",
                self.num_qubits
            )));
        }
        if let Gate::CX(c, t) = gate {
            if c == t {
                return Err(Error::Validation(format!(
                    "cx needs two distinct qubits, got {c},{t}"
                )));
            }
        }
        if let Some(t) = gate.theta() {
            if !t.is_finite() {
                return Err(Error::Validation(format!("rotation angle {t} is not finite")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Append a gate known to be valid for this circuit.
    pub(crate) fn push(&mut self, gate: Gate) {
        debug_assert!(gate.qubits().iter().all(|&q| q < self.num_qubits));
        self.gates.push(gate);
    }

    pub(crate) fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        for g in gates {
            self.push(g);
        }
    }

    pub(crate) fn barrier(&mut self) {
        self.push(Gate::Barrier((0..self.num_qubits).collect()));
    }

    /// True iff no rotation has an angle off the π/2 grid.
    pub fn is_clifford(&self) -> bool {
        self.gates.iter().all(Gate::is_clifford)
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn one_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_one_qubit()).count()
    }

    /// Number of two-qubit layers. Barriers synchronize the wires they span.
    pub fn two_qubit_depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for g in &self.gates {
            match *g {
                Gate::CX(c, t) => {
                    let d = level[c].max(level[t]) + 1;
                    level[c] = d;
                    level[t] = d;
                }
                Gate::Barrier(ref qs) => {
                    let d = qs.iter().map(|&q| level[q]).max().unwrap_or(0);
                    for &q in qs {
                        level[q] = d;
                    }
                }
                _ => {}
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    /// Number of gates excluding barriers.
    pub fn non_barrier_count(&self) -> usize {
        self.gates.iter().filter(|g| !g.is_barrier()).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitFile::from(self)).expect("circuit serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CircuitFile = serde_json::from_str(text)?;
        file.try_into()
    }

    /// Stable content hash (hex, 16 characters).
    pub fn content_hash(&self) -> String {
        let compact = serde_json::to_string(&CircuitFile::from(self)).expect("circuit serialization");
        let digest = Sha256::digest(compact.as_bytes());
        hex::encode(&digest[..8])
    }
}

pub fn load_circuit(path: impl AsRef<Path>) -> Result<Circuit> {
    Circuit::from_json(&fs::read_to_string(path)?)
}

pub fn save_circuit(circuit: &Circuit, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, circuit.to_json())?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    num_qubits: usize,
    gates: Vec<GateRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    kind: String,
    qubits: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl From<&Circuit> for CircuitFile {
    fn from(c: &Circuit) -> Self {
        Self {
            num_qubits: c.num_qubits,
            gates: c
                .gates
                .iter()
                .map(|g| GateRecord {
                    kind: g.name().to_string(),
                    qubits: g.qubits(),
                    theta: g.theta(),
                })
                .collect(),
        }
    }
}

impl TryFrom<CircuitFile> for Circuit {
    type Error = Error;

    fn try_from(file: CircuitFile) -> Result<Self> {
        let mut c = Circuit::new(file.num_qubits);
        for (i, rec) in file.gates.into_iter().enumerate() {
            let kind = rec.kind.to_ascii_lowercase();
            let arity = match kind.as_str() {
                "cx" => Some(2),
                "barrier" => None,
                _ => Some(1),
            };
            if let Some(k) = arity {
                if rec.qubits.len() != k {
                    return Err(Error::Parse(format!(
                        "gates[{i}].qubits: `{kind}` takes {k} qubit(s), got {}",
                        rec.qubits.len()
                    )));
                }
            }
            let theta = || {
                rec.theta
                    .ok_or_else(|| Error::Parse(format!("gates[{i}].theta: missing for `{kind}`")))
            };
            let q = rec.qubits.first().copied().unwrap_or(0);
            let gate = match kind.as_str() {
                "h" => Gate::H(q),
                "s" => Gate::S(q),
                "sdg" => Gate::Sdg(q),
                "x" => Gate::X(q),
                "y" => Gate::Y(q),
                "z" => Gate::Z(q),
                "cx" => Gate::CX(rec.qubits[0], rec.qubits[1]),
                "rz" => Gate::RZ(q, theta()?),
                "ry" => Gate::RY(q, theta()?),
                "rx" => Gate::RX(q, theta()?),
                "barrier" => Gate::Barrier(rec.qubits.clone()),
                other => return Err(Error::Parse(format!("gates[{i}].kind: unknown gate `{other}`"))),
            };
            c.try_push(gate)?;
        }
        Ok(c)
    }
}

/// Distinct qubit pairs coupled by two-qubit gates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub num_vertices: usize,
    /// Canonical `(min, max)` pairs, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl InteractionGraph {
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| crate::device::canonical_edge(a, b))
            .collect();
        Self {
            num_vertices,
            edges: set.into_iter().collect(),
        }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.num_vertices == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.num_vertices
    }
}

pub fn interaction_graph(circuit: &Circuit) -> InteractionGraph {
    InteractionGraph::new(
        circuit.num_qubits(),
        circuit.gates().iter().filter_map(|g| match *g {
            Gate::CX(c, t) => Some((c, t)),
            _ => None,
        }),
    )
}
