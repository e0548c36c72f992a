//! Noisy Clifford simulation.
//!
//! [`exact_expval`] propagates each observable term backwards through the
//! circuit and scales it at every depolarizing site it touches.
//! [`sampled_expval`] injects random Pauli faults shot by shot. Both start
//! from `|0…0⟩` and share one channel convention: depolarizing of strength
//! `p` is `ρ ↦ (1−p)ρ + p·I/d` on the gate's support.

mod exact;
mod noise;
mod observable;
mod pauli;
mod sampled;
mod tableau;

use serde::{Deserialize, Serialize};

pub use exact::{exact_expval, ideal_expval, MAX_EXACT_PROJECTOR_QUBITS};
pub use noise::NoiseModel;
pub use observable::{make_observable, ObservableKind, PauliObservable};
pub use pauli::PauliString;
pub use sampled::sampled_expval;
pub use tableau::{AffineSampler, Tableau};

pub(crate) use exact::zero_probability;
pub(crate) use sampled::sampled_zero_probability;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMode {
    Exact,
    Sampled,
}

/// Expectation value with its standard error; `shots == 0` and
/// `stderr == 0` in exact mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpvalEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub shots: u64,
    pub mode: EstimateMode,
}

/// Exact mode for `shots == 0`, sampled otherwise.
pub fn expval(
    circuit: &crate::circuit::Circuit,
    layout: &crate::layout::Layout,
    device: &crate::device::DeviceModel,
    noise: &NoiseModel,
    observable: &PauliObservable,
    shots: u64,
    seed: u64,
) -> crate::error::Result<ExpvalEstimate> {
    if shots == 0 {
        exact_expval(circuit, layout, device, noise, observable)
    } else {
        sampled_expval(circuit, layout, device, noise, observable, shots, seed)
    }
}

/// `(1 − p)·ideal + p·noisy_floor`.
pub fn global_depolarizing_expval(ideal: f64, noisy_floor: f64, p: f64) -> f64 {
    (1.0 - p) * ideal + p * noisy_floor
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_formula() {
        assert!((global_depolarizing_expval(1.0, 0.0, 0.1) - 0.9).abs() < 1e-15);
        assert_eq!(global_depolarizing_expval(0.7, 0.2, 0.0), 0.7);
        assert_eq!(global_depolarizing_expval(0.7, 0.2, 1.0), 0.2);
    }
}
