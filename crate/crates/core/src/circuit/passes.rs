//! Circuit-to-circuit passes.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::PauliString;

/// Snap to `kπ/2` with `k` the nearest integer, ties toward the smaller `k`.
fn snap(theta: f64) -> f64 {
    (theta / FRAC_PI_2 - 0.5).ceil() * FRAC_PI_2
}

/// Snap every rotation to the π/2 grid and rewrite it over {H, S, Sdg, X, Y, Z}.
///
/// Non-rotation gates, barriers included, pass through unchanged.
pub fn cliffordize(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.num_qubits());
    for g in circuit.gates() {
        let snapped = match *g {
            Gate::RZ(q, t) => Gate::RZ(q, snap(t)),
            Gate::RY(q, t) => Gate::RY(q, snap(t)),
            Gate::RX(q, t) => Gate::RX(q, snap(t)),
            Gate::Barrier(_) => {
                out.push(g.clone());
                continue;
            }
            ref other => other.clone(),
        };
        for op in snapped
            .clifford_decomposition()
            .expect("snapped angle is a multiple of π/2")
        {
            out.push(op);
        }
    }
    out
}

/// Unitary folding to noise factor `λ`.
///
/// With `λ - 1 = 2(k + r)`, `0 ≤ r < 1`, every non-barrier gate `G` becomes
/// `G (G† G)^k` and the first `⌊r·N⌋` of them get one more `G† G` pair, for
/// `N(2k + 1) + 2⌊rN⌋` gates in total.
pub fn fold(circuit: &Circuit, lambda: f64) -> Result<Circuit> {
    if !lambda.is_finite() || lambda < 1.0 {
        return Err(Error::InvalidInput(format!(
            "noise factor must be >= 1, got {lambda}"
        )));
    }
    let half = (lambda - 1.0) / 2.0;
    let k = half.floor() as usize;
    // Absorb rounding in (λ−1)/2·N.
    let extra = ((half - k as f64) * circuit.non_barrier_count() as f64 + 1e-9).floor() as usize;
    let mut out = Circuit::new(circuit.num_qubits());
    let mut seen = 0;
    for g in circuit.gates() {
        out.push(g.clone());
        if g.is_barrier() {
            continue;
        }
        let pairs = k + usize::from(seen < extra);
        seen += 1;
        let inv = g.inverse();
        for _ in 0..pairs {
            out.push(inv.clone());
            out.push(g.clone());
        }
    }
    Ok(out)
}

fn pauli_gate(x: bool, z: bool, q: usize) -> Option<Gate> {
    match (x, z) {
        (false, false) => None,
        (true, false) => Some(Gate::X(q)),
        (true, true) => Some(Gate::Y(q)),
        (false, true) => Some(Gate::Z(q)),
    }
}

/// Sandwich every CX between a random two-qubit Pauli `P` and `CX·P·CX†`.
///
/// `P` is uniform over all 16 Paulis, identity included. Global phases are
/// dropped, so the twirled circuit equals the input up to phase.
pub fn pauli_twirl(circuit: &Circuit, seed: u64) -> Result<Circuit> {
    if !circuit.is_clifford() {
        return Err(Error::NonClifford(
            "pauli_twirl requires a Clifford circuit".into(),
        ));
    }
    let mut rng = rng::stream(seed, &[0x7a1]);
    let mut out = Circuit::new(circuit.num_qubits());
    for g in circuit.gates() {
        let Gate::CX(c, t) = *g else {
            out.push(g.clone());
            continue;
        };
        let draw: u8 = rng.random_range(0..16);
        let mut p = PauliString::identity(2);
        p.set(0, draw & 1 != 0, draw & 2 != 0);
        p.set(1, draw & 4 != 0, draw & 8 != 0);
        out.extend(pauli_gate(p.x(0), p.z(0), c));
        out.extend(pauli_gate(p.x(1), p.z(1), t));
        out.push(g.clone());
        p.conjugate_by(&Gate::CX(0, 1));
        out.extend(pauli_gate(p.x(0), p.z(0), c));
        out.extend(pauli_gate(p.x(1), p.z(1), t));
    }
    Ok(out)
}
