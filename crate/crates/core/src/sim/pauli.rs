//! Signed Pauli strings in the binary symplectic representation.

use std::fmt;

use crate::circuit::Gate;
use crate::error::{Error, Result};

pub(crate) fn words(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(w: &[u64], q: usize) -> bool {
    w[q / 64] >> (q % 64) & 1 == 1
}

#[inline]
pub(crate) fn flip_bit(w: &mut [u64], q: usize) {
    w[q / 64] ^= 1 << (q % 64);
}

#[inline]
fn put_bit(w: &mut [u64], q: usize, v: bool) {
    if get_bit(w, q) != v {
        flip_bit(w, q);
    }
}

/// `±P₀⊗…⊗P_{n-1}` with `(x, z) = (1, 1)` meaning `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    neg: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: vec![0; words(n)],
            z: vec![0; words(n)],
            neg: false,
        }
    }

    /// `Z` on each listed qubit.
    pub fn z_on(n: usize, qubits: &[usize]) -> Self {
        let mut p = Self::identity(n);
        for &q in qubits {
            p.set(q, false, true);
        }
        p
    }

    /// Parse `[+|-]` followed by one of `IXYZ_` per qubit.
    pub fn parse(text: &str) -> Result<Self> {
        let (neg, body) = match text.as_bytes().first() {
            Some(b'-') => (true, &text[1..]),
            Some(b'+') => (false, &text[1..]),
            _ => (false, text),
        };
        let mut p = Self::identity(body.len());
        p.neg = neg;
        for (q, c) in body.chars().enumerate() {
            let (x, z) = match c.to_ascii_uppercase() {
                'I' | '_' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                other => {
                    return Err(Error::Parse(format!(
                        "pauli string `{text}`: bad letter `{other}`"
                    )))
                }
            };
            p.set(q, x, z);
        }
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x(&self, q: usize) -> bool {
        get_bit(&self.x, q)
    }

    pub fn z(&self, q: usize) -> bool {
        get_bit(&self.z, q)
    }

    pub fn set(&mut self, q: usize, x: bool, z: bool) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        put_bit(&mut self.x, q, x);
        put_bit(&mut self.z, q, z);
    }

    pub fn is_negative(&self) -> bool {
        self.neg
    }

    pub fn sign(&self) -> f64 {
        if self.neg {
            -1.0
        } else {
            1.0
        }
    }

    pub fn negate(&mut self) {
        self.neg = !self.neg;
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// True when the string contains only `I` and `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.x(q) || self.z(q)
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.acts_on(q)).collect()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        parity % 2 == 0
    }

    /// Replace `self` by the product `self · other`. The two must commute so
    /// the product is again a signed Hermitian string.
    pub fn mul_assign(&mut self, other: &PauliString) {
        debug_assert!(self.commutes_with(other));
        // Phase exponent (powers of i) of the per-qubit products.
        let mut phase: i32 = 0;
        for q in 0..self.n {
            phase += pauli_product_phase(other.x(q), other.z(q), self.x(q), self.z(q));
        }
        if self.neg {
            phase += 2;
        }
        if other.neg {
            phase += 2;
        }
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
        self.neg = phase.rem_euclid(4) == 2;
    }

    /// Conjugate in place: `P ↦ G P G†`.
    ///
    /// # Panics
    ///
    /// If `gate` is a rotation off the π/2 grid.
    pub fn conjugate_by(&mut self, gate: &Gate) {
        match *gate {
            Gate::H(q) => {
                let (x, z) = (self.x(q), self.z(q));
                self.neg ^= x & z;
                self.set(q, z, x);
            }
            Gate::S(q) => {
                let (x, z) = (self.x(q), self.z(q));
                self.neg ^= x & z;
                self.set(q, x, z ^ x);
            }
            Gate::Sdg(q) => {
                let (x, z) = (self.x(q), self.z(q));
                self.neg ^= x & !z;
                self.set(q, x, z ^ x);
            }
            Gate::X(q) => self.neg ^= self.z(q),
            Gate::Z(q) => self.neg ^= self.x(q),
            Gate::Y(q) => self.neg ^= self.x(q) ^ self.z(q),
            Gate::CX(a, b) => {
                let (xa, za, xb, zb) = (self.x(a), self.z(a), self.x(b), self.z(b));
                self.neg ^= xa & zb & !(xb ^ za);
                self.set(b, xb ^ xa, zb);
                self.set(a, xa, za ^ zb);
            }
            Gate::Barrier(_) => {}
            ref rotation => {
                let ops = rotation
                    .clifford_decomposition()
                    .unwrap_or_else(|| panic!("cannot conjugate by non-Clifford `{rotation}`"));
                for op in &ops {
                    self.conjugate_by(op);
                }
            }
        }
    }

    /// Conjugate in place: `P ↦ G† P G`.
    pub fn conjugate_by_inverse(&mut self, gate: &Gate) {
        match gate.clifford_decomposition() {
            Some(ops) => {
                for op in ops.iter().rev() {
                    self.conjugate_by(&op.inverse());
                }
            }
            None => self.conjugate_by(&gate.inverse()),
        }
    }
}

/// Power of `i` picked up by the single-qubit product `P₁·P₂` when both are
/// written as `X^x Z^z` with `(1, 1)` read as `Y`.
fn pauli_product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x2, z2) = (x2 as i32, z2 as i32);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.neg { "-" } else { "+" })?;
        for q in 0..self.n {
            f.write_str(match (self.x(q), self.z(q)) {
                (false, false) => "I",
                (true, false) => "X",
                (true, true) => "Y",
                (false, true) => "Z",
            })?;
        }
        Ok(())
    }
}
