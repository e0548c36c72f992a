use serde::{Deserialize, Serialize};

use crate::circuit::{interaction_graph, Circuit, Gate};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::layout::Layout;

/// How noise enters a simulation.
///
/// Depolarizing of strength `p` on a support of dimension `d` is
/// `ρ ↦ (1−p)ρ + p·Tr_S(ρ)⊗I/d`, the same convention in every mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum NoiseModel {
    Ideal,
    /// Depolarizing after every gate, with strength read from the device
    /// through the layout: the edge error after each CX, the qubit error
    /// after each one-qubit gate.
    PerGateDepolarizing,
    /// Depolarizing of the whole register once, at the end.
    GlobalDepolarizing {
        p: f64,
    },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        if let NoiseModel::GlobalDepolarizing { p } = *self {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "global depolarizing p must be in [0,1], got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// One step of a compiled program over virtual qubits.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Step {
    /// Elementary Clifford gate.
    Gate(Gate),
    /// Depolarizing site on one qubit, or on both when `qubits[1]` is set.
    Noise { qubits: [usize; 2], two: bool, p: f64 },
}

impl Step {
    pub(crate) fn noise_support(&self) -> &[usize] {
        match self {
            Step::Noise { qubits, two, .. } => &qubits[..1 + *two as usize],
            Step::Gate(_) => &[],
        }
    }
}

/// Circuit lowered to elementary Cliffords interleaved with noise sites.
#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub num_qubits: usize,
    pub steps: Vec<Step>,
}

impl Program {
    pub(crate) fn sites(&self) -> impl Iterator<Item = (usize, &Step)> {
        self.steps
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Step::Noise { .. }))
    }
}

pub(crate) fn check_clifford(circuit: &Circuit) -> Result<()> {
    match circuit.gates().iter().find(|g| !g.is_clifford()) {
        Some(g) => Err(Error::NonClifford(g.to_string())),
        None => Ok(()),
    }
}

/// Lower `circuit` for simulation. Per-gate noise sites are emitted only
/// for [`NoiseModel::PerGateDepolarizing`], and only when nonzero.
pub(crate) fn compile(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
) -> Result<Program> {
    check_clifford(circuit)?;
    noise.validate()?;
    let per_gate = matches!(noise, NoiseModel::PerGateDepolarizing);
    if per_gate {
        layout.validate(&interaction_graph(circuit), device)?;
    }
    let mut steps = Vec::with_capacity(circuit.len() * 2);
    for g in circuit.gates() {
        if g.is_barrier() {
            continue;
        }
        let ops = g.clifford_decomposition().expect("checked Clifford");
        steps.extend(ops.into_iter().map(Step::Gate));
        if !per_gate {
            continue;
        }
        let site = match *g {
            Gate::CX(a, b) => {
                let (pa, pb) = (layout.physical(a), layout.physical(b));
                let p = device.two_qubit_error(pa, pb).expect("validated layout");
                Step::Noise {
                    qubits: [a, b],
                    two: true,
                    p,
                }
            }
            _ => {
                let q = g.qubits()[0];
                let p = device.one_qubit_error(layout.physical(q));
                Step::Noise {
                    qubits: [q, q],
                    two: false,
                    p,
                }
            }
        };
        if matches!(site, Step::Noise { p, .. } if p > 0.0) {
            steps.push(site);
        }
    }
    Ok(Program {
        num_qubits: circuit.num_qubits(),
        steps,
    })
}
