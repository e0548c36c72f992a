use rayon::prelude::*;

use super::noise::{compile, Program, Step};
use super::pauli::PauliString;
use super::{global_depolarizing_expval, EstimateMode, ExpvalEstimate, NoiseModel, PauliObservable};
use crate::circuit::Circuit;
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::layout::Layout;

/// `⟨0…0| U† P U |0…0⟩` with every noise site scaling the propagated
/// string by `1 − p` when it touches the site.
pub(crate) fn propagate(program: &Program, term: &PauliString) -> f64 {
    let mut p = term.clone();
    let mut scale = 1.0;
    for step in program.steps.iter().rev() {
        match step {
            Step::Gate(g) => p.conjugate_by_inverse(g),
            Step::Noise { p: strength, .. } => {
                if step.noise_support().iter().any(|&q| p.acts_on(q)) {
                    scale *= 1.0 - strength;
                }
            }
        }
    }
    if p.is_diagonal() {
        scale * p.sign()
    } else {
        0.0
    }
}

pub(crate) fn observable_value(program: &Program, observable: &PauliObservable) -> f64 {
    let parts: Vec<f64> = observable
        .terms()
        .par_iter()
        .map(|(c, p)| c * propagate(program, p))
        .collect();
    parts.iter().sum()
}

pub(crate) fn check_width(circuit: &Circuit, observable: &PauliObservable) -> Result<()> {
    if circuit.num_qubits() != observable.num_qubits() {
        return Err(Error::InvalidInput(format!(
            "observable acts on {} qubits, circuit has {}",
            observable.num_qubits(),
            circuit.num_qubits()
        )));
    }
    Ok(())
}

/// Exact expectation value from `|0…0⟩` by Heisenberg back-propagation of
/// each observable term through the Clifford circuit.
pub fn exact_expval(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
    observable: &PauliObservable,
) -> Result<ExpvalEstimate> {
    check_width(circuit, observable)?;
    let program = compile(circuit, layout, device, noise)?;
    let value = observable_value(&program, observable);
    let mean = match *noise {
        NoiseModel::GlobalDepolarizing { p } => {
            global_depolarizing_expval(value, observable.identity_component(), p)
        }
        _ => value,
    };
    Ok(ExpvalEstimate {
        mean,
        stderr: 0.0,
        shots: 0,
        mode: EstimateMode::Exact,
    })
}

/// Noiseless expectation value.
pub fn ideal_expval(circuit: &Circuit, observable: &PauliObservable) -> Result<f64> {
    check_width(circuit, observable)?;
    let dummy = DeviceModel::uniform("ideal", 1, vec![], 0.0, 0.0)?;
    let program = compile(
        circuit,
        &Layout::trivial(circuit.num_qubits()),
        &dummy,
        &NoiseModel::Ideal,
    )?;
    Ok(observable_value(&program, observable))
}

/// Exact probability of reading all zeros, `2⁻ⁿ Σ_u ⟨Z^u⟩` over all `2ⁿ`
/// Z strings. Limited to 16 qubits.
pub(crate) fn zero_probability(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
) -> Result<f64> {
    let n = circuit.num_qubits();
    if n > MAX_EXACT_PROJECTOR_QUBITS {
        return Err(Error::InvalidInput(format!(
            "exact all-zeros probability is limited to {MAX_EXACT_PROJECTOR_QUBITS} qubits, got {n}; use shots"
        )));
    }
    let program = compile(circuit, layout, device, noise)?;
    let total: f64 = (0..1u64 << n)
        .into_par_iter()
        .map(|u| {
            let qs: Vec<usize> = (0..n).filter(|&q| u >> q & 1 == 1).collect();
            propagate(&program, &PauliString::z_on(n, &qs))
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let p = total / (1u64 << n) as f64;
    Ok(match *noise {
        NoiseModel::GlobalDepolarizing { p: g } => global_depolarizing_expval(p, 1.0 / (1u64 << n) as f64, g),
        _ => p,
    })
}

/// Qubit limit of the exact all-zeros probability.
pub const MAX_EXACT_PROJECTOR_QUBITS: usize = 16;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::sim::make_observable;

    fn z0(n: usize) -> PauliObservable {
        PauliObservable::new(n, vec![(1.0, PauliString::z_on(n, &[0]))]).unwrap()
    }

    #[test]
    fn empty_circuit() {
        assert_eq!(ideal_expval(&Circuit::new(1), &z0(1)).unwrap(), 1.0);
    }

    #[test]
    fn x_then_depolarizing() {
        let p = 0.07;
        let c = Circuit::from_gates(1, vec![Gate::X(0)]).unwrap();
        let dev = DeviceModel::uniform("q", 1, vec![], 0.0, p).unwrap();
        let est = exact_expval(
            &c,
            &Layout::trivial(1),
            &dev,
            &NoiseModel::PerGateDepolarizing,
            &z0(1),
        )
        .unwrap();
        assert!((est.mean + (1.0 - p)).abs() < 1e-15);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn global_mode_scales_traceless_part() {
        let c = Circuit::new(3);
        let dev = DeviceModel::uniform("q", 3, vec![], 0.0, 0.0).unwrap();
        let obs = make_observable(3, 1).unwrap();
        let est = exact_expval(
            &c,
            &Layout::trivial(3),
            &dev,
            &NoiseModel::GlobalDepolarizing { p: 0.1 },
            &obs,
        )
        .unwrap();
        assert!((est.mean - 0.9).abs() < 1e-15);
    }

    #[test]
    fn width_mismatch() {
        assert!(ideal_expval(&Circuit::new(2), &z0(3)).is_err());
    }
}
