use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pauli::PauliString;
use crate::error::{Error, Result};

/// Real linear combination of Pauli strings.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliObservable {
    num_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliObservable {
    pub fn new(num_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("observable needs at least one term".into()));
        }
        for (c, p) in &terms {
            if !c.is_finite() {
                return Err(Error::InvalidInput(format!("coefficient {c} is not finite")));
            }
            if p.num_qubits() != num_qubits {
                return Err(Error::InvalidInput(format!(
                    "term {p} has {} qubits, observable has {num_qubits}",
                    p.num_qubits()
                )));
            }
        }
        Ok(Self { num_qubits, terms })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// True when every term is a product of `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.is_diagonal())
    }

    /// `Tr(O)/2ⁿ`: the signed coefficient sum of identity terms.
    pub fn identity_component(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(_, p)| p.is_identity())
            .map(|(c, p)| c * p.sign())
            .sum()
    }
}

/// Translation-averaged Z strings of weight 1, 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObservableKind {
    #[serde(rename = "zw1")]
    Zw1,
    #[serde(rename = "zw2")]
    Zw2,
    #[serde(rename = "zw3")]
    Zw3,
}

impl ObservableKind {
    pub fn weight(self) -> usize {
        match self {
            ObservableKind::Zw1 => 1,
            ObservableKind::Zw2 => 2,
            ObservableKind::Zw3 => 3,
        }
    }

    pub fn build(self, n: usize) -> Result<PauliObservable> {
        make_observable(n, self.weight())
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "zw{}", self.weight())
    }
}

impl FromStr for ObservableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zw1" => Ok(ObservableKind::Zw1),
            "zw2" => Ok(ObservableKind::Zw2),
            "zw3" => Ok(ObservableKind::Zw3),
            other => Err(Error::InvalidInput(format!(
                "unknown observable `{other}` (expected zw1, zw2 or zw3)"
            ))),
        }
    }
}

/// `1/(n−w+1) · Σᵢ Zᵢ Zᵢ₊₁ … Zᵢ₊w₋₁` for `w ∈ {1, 2, 3}`.
pub fn make_observable(n: usize, weight: usize) -> Result<PauliObservable> {
    if !(1..=3).contains(&weight) {
        return Err(Error::InvalidInput(format!(
            "observable weight must be 1, 2 or 3, got {weight}"
        )));
    }
    if n < weight {
        return Err(Error::InvalidInput(format!(
            "weight-{weight} observable needs at least {weight} qubits, got {n}"
        )));
    }
    let count = n - weight + 1;
    let coef = 1.0 / count as f64;
    let terms = (0..count)
        .map(|i| {
            let qs: Vec<usize> = (i..i + weight).collect();
            (coef, PauliString::z_on(n, &qs))
        })
        .collect();
    PauliObservable::new(n, terms)
}
