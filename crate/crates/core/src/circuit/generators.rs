//! Benchmark circuit families.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::rng;

/// Hardware-efficient SU(2) ansatz with linear CX entanglement.
///
/// Each repetition is an RY layer and an RZ layer on every qubit followed by
/// the chain `CX(0,1), CX(1,2), …`; a final rotation layer closes the
/// circuit. Barriers separate the layers, so the two-qubit depth is exactly
/// `(n - 1) * reps`.
///
/// Angles use a near-identity initialization: RY angles are uniform in
/// `[-π/4, π/4)` and RZ angles uniform in `[-π, π)`. After
/// [`cliffordize`](super::cliffordize) the ideal output state is `|0…0⟩` up
/// to phase, so the ideal `⟨Z_i⟩` is 1 for every qubit.
pub fn gen_efficient_su2(n: usize, reps: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "efficient-su2 needs n >= 2, got {n}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidInput("efficient-su2 needs reps >= 1".into()));
    }
    let mut rng = rng::stream(seed, &[SU2_STREAM]);
    let mut c = Circuit::new(n);
    let mut rotations = |c: &mut Circuit| {
        for q in 0..n {
            c.push(Gate::RY(q, rng.random_range(-FRAC_PI_4..FRAC_PI_4)));
        }
        for q in 0..n {
            c.push(Gate::RZ(q, rng.random_range(-PI..PI)));
        }
    };
    for _ in 0..reps {
        rotations(&mut c);
        c.barrier();
        for q in 0..n - 1 {
            c.push(Gate::CX(q, q + 1));
        }
        c.barrier();
    }
    rotations(&mut c);
    Ok(c)
}

const SU2_STREAM: u64 = 0x5c2;

/// Angles of the Trotterized transverse-field Ising evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamSimParams {
    /// RZ angle inside each `CX·RZ·CX` block, `2·J·dt`.
    pub zz_angle: f64,
    /// RX angle of the transverse-field layer, `2·h·dt`.
    pub x_angle: f64,
}

impl Default for HamSimParams {
    /// `J·dt = π/4`, `h·dt = 0.1`.
    fn default() -> Self {
        Self {
            zz_angle: FRAC_PI_2,
            x_angle: 0.2,
        }
    }
}

/// First-order Trotterization of the 1-D transverse-field Ising model.
///
/// Every step applies RZZ blocks (`CX·RZ·CX`) on the even bonds, then on the
/// odd bonds, then an RX layer on all qubits, so each bond carries one block
/// per step.
pub fn gen_hamiltonian_sim(n: usize, steps: usize, params: HamSimParams) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "hamiltonian simulation needs n >= 2, got {n}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidInput(
            "hamiltonian simulation needs steps >= 1".into(),
        ));
    }
    let mut c = Circuit::new(n);
    for _ in 0..steps {
        for parity in [0, 1] {
            for q in (parity..n - 1).step_by(2) {
                c.push(Gate::CX(q, q + 1));
                c.push(Gate::RZ(q + 1, params.zz_angle));
                c.push(Gate::CX(q, q + 1));
            }
        }
        for q in 0..n {
            c.push(Gate::RX(q, params.x_angle));
        }
    }
    Ok(c)
}

/// The 24 single-qubit Cliffords as gate words (time order): a Z-axis
/// rotation followed by one of six maps placing Z on ±X, ±Y, ±Z.
fn one_qubit_clifford(index: usize, q: usize) -> Vec<Gate> {
    let mut word = match index % 4 {
        0 => vec![],
        1 => vec![Gate::S(q)],
        2 => vec![Gate::Z(q)],
        _ => vec![Gate::Sdg(q)],
    };
    word.extend(match index / 4 {
        0 => vec![],
        1 => vec![Gate::X(q)],
        2 => vec![Gate::H(q)],
        3 => vec![Gate::H(q), Gate::Z(q)],
        4 => vec![Gate::H(q), Gate::S(q)],
        _ => vec![Gate::H(q), Gate::Sdg(q)],
    });
    word
}

/// Brickwork of random two-qubit Clifford blocks followed by its inverse.
///
/// `depth` counts two-qubit layers of the whole circuit and must be even;
/// the first `depth/2` layers are random, the rest undo them. The ideal
/// output is `|0…0⟩`.
pub fn gen_mirrored_brickwork(n: usize, depth: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("brickwork needs n >= 2, got {n}")));
    }
    if depth % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "brickwork depth must be even, got {depth}"
        )));
    }
    let mut rng = rng::stream(seed, &[0xb71c]);
    let mut forward = Vec::new();
    for layer in 0..depth / 2 {
        for a in (layer % 2..n - 1).step_by(2) {
            let b = a + 1;
            forward.extend(one_qubit_clifford(rng.random_range(0..24), a));
            forward.extend(one_qubit_clifford(rng.random_range(0..24), b));
            forward.push(Gate::CX(a, b));
        }
    }
    let mut c = Circuit::new(n);
    for g in &forward {
        c.push(g.clone());
    }
    for g in forward.iter().rev() {
        c.push(g.inverse());
    }
    Ok(c)
}

/// Named benchmark family, for campaigns and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitFamily {
    Su2,
    Hamsim,
    Brickwork,
}

impl CircuitFamily {
    /// Generate the family member; `reps` is the repetition count for su2,
    /// the Trotter step count for hamsim and the two-qubit depth for
    /// brickwork.
    pub fn generate(self, n: usize, reps: usize, seed: u64) -> Result<Circuit> {
        match self {
            CircuitFamily::Su2 => gen_efficient_su2(n, reps, seed),
            CircuitFamily::Hamsim => gen_hamiltonian_sim(n, reps, HamSimParams::default()),
            CircuitFamily::Brickwork => gen_mirrored_brickwork(n, reps, seed),
        }
    }
}

impl fmt::Display for CircuitFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CircuitFamily::Su2 => "su2",
            CircuitFamily::Hamsim => "hamsim",
            CircuitFamily::Brickwork => "brickwork",
        })
    }
}

impl FromStr for CircuitFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "su2" | "efficient-su2" => Ok(CircuitFamily::Su2),
            "hamsim" | "hamiltonian" => Ok(CircuitFamily::Hamsim),
            "brickwork" => Ok(CircuitFamily::Brickwork),
            other => Err(Error::InvalidInput(format!("unknown circuit family `{other}`"))),
        }
    }
}
