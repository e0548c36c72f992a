//! Stabilizer tableau and the Z-basis outcome distribution of its state.

use super::pauli::{flip_bit, get_bit, words, PauliString};
use crate::circuit::Gate;

/// Stabilizer generators of an `n`-qubit pure state.
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    stabilizers: Vec<PauliString>,
}

impl Tableau {
    /// The state `|0…0⟩`.
    pub fn zero_state(n: usize) -> Self {
        Self {
            n,
            stabilizers: (0..n).map(|q| PauliString::z_on(n, &[q])).collect(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    /// Apply a Clifford gate to the state.
    pub fn apply(&mut self, gate: &Gate) {
        for s in &mut self.stabilizers {
            s.conjugate_by(gate);
        }
    }

    /// Exact Z-basis outcome distribution, which for a stabilizer state is
    /// uniform over an affine subspace of `{0,1}^n`.
    pub fn z_distribution(&self) -> AffineSampler {
        let n = self.n;
        let mut rows = self.stabilizers.clone();
        // Eliminate X parts; rows past `rank` are then Z-type stabilizers.
        let mut rank = 0;
        for q in 0..n {
            let Some(p) = (rank..n).find(|&i| rows[i].x(q)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != rank && row.x(q) {
                    row.mul_assign(&pivot);
                }
            }
            rank += 1;
        }
        // Each Z-type stabilizer (-1)^r Z^z forces z·b = r (mod 2).
        let mut eqs: Vec<(Vec<u64>, bool)> = rows[rank..]
            .iter()
            .map(|s| (s.z_words().to_vec(), s.is_negative()))
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for q in 0..n {
            let Some(p) = (r..eqs.len()).find(|&i| get_bit(&eqs[i].0, q)) else {
                continue;
            };
            eqs.swap(r, p);
            let (pz, pr) = eqs[r].clone();
            for (i, (z, rhs)) in eqs.iter_mut().enumerate() {
                if i != r && get_bit(z, q) {
                    for (a, b) in z.iter_mut().zip(&pz) {
                        *a ^= b;
                    }
                    *rhs ^= pr;
                }
            }
            pivots.push(q);
            r += 1;
        }
        debug_assert_eq!(r, eqs.len(), "Z-type stabilizers are independent");
        let mut offset = vec![0u64; words(n)];
        for (&q, (_, rhs)) in pivots.iter().zip(&eqs) {
            if *rhs {
                flip_bit(&mut offset, q);
            }
        }
        let mut basis = Vec::new();
        for f in (0..n).filter(|q| !pivots.contains(q)) {
            let mut v = vec![0u64; words(n)];
            flip_bit(&mut v, f);
            for (&q, (z, _)) in pivots.iter().zip(&eqs) {
                if get_bit(z, f) {
                    flip_bit(&mut v, q);
                }
            }
            basis.push(v);
        }
        AffineSampler { n, offset, basis }
    }
}

/// Uniform distribution over `offset ⊕ span(basis)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSampler {
    n: usize,
    offset: Vec<u64>,
    basis: Vec<Vec<u64>>,
}

impl AffineSampler {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of uniformly random bits per sample.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn offset(&self) -> &[u64] {
        &self.offset
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    /// Outcome for the given choice of basis coefficients.
    pub fn outcome(&self, choices: impl Fn(usize) -> bool) -> Vec<u64> {
        let mut out = self.offset.clone();
        for (k, v) in self.basis.iter().enumerate() {
            if choices(k) {
                for (a, b) in out.iter_mut().zip(v) {
                    *a ^= b;
                }
            }
        }
        out
    }

    /// Probability of each outcome, indexed with qubit 0 as the least
    /// significant bit. Only for small `n`.
    pub fn probabilities(&self) -> Vec<f64> {
        assert!(self.n <= 24, "dense distribution of {} qubits", self.n);
        let mut probs = vec![0.0; 1 << self.n];
        let dim = self.dimension();
        let w = 1.0 / (1u64 << dim) as f64;
        for c in 0..1u64 << dim {
            let bits = self.outcome(|k| c >> k & 1 == 1);
            let idx = (0..self.n).fold(0usize, |acc, q| acc | (get_bit(&bits, q) as usize) << q);
            probs[idx] += w;
        }
        probs
    }
}
