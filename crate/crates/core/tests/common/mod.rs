//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use ffzne::circuit::{Circuit, Gate};
use ffzne::device::{canonical_edge, DeviceModel};
use ffzne::layout::Layout;
use ffzne::scoring::{ScoreMethod, ScoreTable, ScoredLayout};
use ffzne::sim::{NoiseModel, PauliObservable};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const O: C = C::new(0.0, 0.0);
const I1: C = C::new(1.0, 0.0);
const IM: C = C::new(0.0, 1.0);

/// Local matrix of a gate, rows and columns indexed by the gate's qubits
/// with the first qubit least significant.
pub fn gate_matrix(g: &Gate) -> (Vec<usize>, Vec<C>) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let rot = |t: f64| (C::new((t / 2.0).cos(), 0.0), (t / 2.0).sin());
    match *g {
        Gate::H(q) => (
            vec![q],
            vec![C::new(r, 0.0), C::new(r, 0.0), C::new(r, 0.0), C::new(-r, 0.0)],
        ),
        Gate::S(q) => (vec![q], vec![I1, O, O, IM]),
        Gate::Sdg(q) => (vec![q], vec![I1, O, O, -IM]),
        Gate::X(q) => (vec![q], vec![O, I1, I1, O]),
        Gate::Y(q) => (vec![q], vec![O, -IM, IM, O]),
        Gate::Z(q) => (vec![q], vec![I1, O, O, -I1]),
        Gate::RZ(q, t) => (
            vec![q],
            vec![C::from_polar(1.0, -t / 2.0), O, O, C::from_polar(1.0, t / 2.0)],
        ),
        Gate::RX(q, t) => {
            let (c, s) = rot(t);
            (vec![q], vec![c, -IM * s, -IM * s, c])
        }
        Gate::RY(q, t) => {
            let (c, s) = rot(t);
            (vec![q], vec![c, C::new(-s, 0.0), C::new(s, 0.0), c])
        }
        Gate::CX(c, t) => {
            // Local index = c + 2t; the control set flips the target.
            let mut m = vec![O; 16];
            for (row, col) in [(0, 0), (2, 2), (1, 3), (3, 1)] {
                m[row * 4 + col] = I1;
            }
            (vec![c, t], m)
        }
        Gate::Barrier(_) => (vec![], vec![I1]),
    }
}

fn pauli_matrix(k: usize) -> Vec<C> {
    match k {
        0 => vec![I1, O, O, I1],
        1 => vec![O, I1, I1, O],
        2 => vec![O, -IM, IM, O],
        _ => vec![I1, O, O, -I1],
    }
}

/// `ψ ↦ M ψ` with `M` acting on `qubits`.
pub fn apply_local(m: &[C], qubits: &[usize], psi: &mut [C]) {
    let k = qubits.len();
    let d = 1 << k;
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let mut scratch = vec![O; d];
    for base in 0..psi.len() {
        if base & mask != 0 {
            continue;
        }
        let index = |local: usize| {
            (0..k).fold(base, |acc, b| {
                if local >> b & 1 == 1 {
                    acc | 1 << qubits[b]
                } else {
                    acc
                }
            })
        };
        for (row, slot) in scratch.iter_mut().enumerate() {
            *slot = (0..d).map(|col| m[row * d + col] * psi[index(col)]).sum();
        }
        for (local, v) in scratch.iter().enumerate() {
            psi[index(local)] = *v;
        }
    }
}

/// Dense density matrix on `n ≤ 6` qubits.
#[derive(Clone)]
pub struct DensityMatrix {
    pub n: usize,
    pub rho: Vec<C>,
}

impl DensityMatrix {
    pub fn zero(n: usize) -> Self {
        let dim = 1 << n;
        let mut rho = vec![O; dim * dim];
        rho[0] = I1;
        Self { n, rho }
    }

    fn dim(&self) -> usize {
        1 << self.n
    }

    /// `ρ ↦ M ρ M†`.
    pub fn conjugate(&mut self, m: &[C], qubits: &[usize]) {
        let dim = self.dim();
        for col in 0..dim {
            let mut v: Vec<C> = (0..dim).map(|r| self.rho[r * dim + col]).collect();
            apply_local(m, qubits, &mut v);
            for (r, x) in v.into_iter().enumerate() {
                self.rho[r * dim + col] = x;
            }
        }
        let mc: Vec<C> = m.iter().map(|z| z.conj()).collect();
        for row in 0..dim {
            let v = &mut self.rho[row * dim..(row + 1) * dim];
            apply_local(&mc, qubits, v);
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let (qs, m) = gate_matrix(g);
        if !qs.is_empty() {
            self.conjugate(&m, &qs);
        }
    }

    /// `(1−p)ρ + p/4ᵏ Σ_P PρP` over all Paulis on `qubits`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        let k = qubits.len();
        let mut acc = vec![O; self.rho.len()];
        for code in 0..1usize << (2 * k) {
            let mut term = self.clone();
            for (b, &q) in qubits.iter().enumerate() {
                term.conjugate(&pauli_matrix(code >> (2 * b) & 3), &[q]);
            }
            for (a, t) in acc.iter_mut().zip(&term.rho) {
                *a += t;
            }
        }
        let w = p / (1 << (2 * k)) as f64;
        for (r, a) in self.rho.iter_mut().zip(&acc) {
            *r = *r * (1.0 - p) + a * w;
        }
    }

    /// `Tr(ρ P)` for a Pauli string given per qubit as 0=I, 1=X, 2=Y, 3=Z.
    pub fn pauli_expectation(&self, paulis: &[usize]) -> f64 {
        let dim = self.dim();
        let mut total = O;
        for col in 0..dim {
            let mut v = vec![O; dim];
            v[col] = I1;
            for (q, &k) in paulis.iter().enumerate() {
                if k != 0 {
                    apply_local(&pauli_matrix(k), &[q], &mut v);
                }
            }
            // (ρ P)[col][col] = Σ_r ρ[col][r] P[r][col]
            total += (0..dim).map(|r| self.rho[col * dim + r] * v[r]).sum::<C>();
        }
        total.re
    }
}

/// Density-matrix reference for every noise model: per-gate sites read
/// from the device through the layout, or one global channel at the end.
pub fn dense_expval(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
    observable: &PauliObservable,
) -> f64 {
    let n = circuit.num_qubits();
    let mut dm = DensityMatrix::zero(n);
    for g in circuit.gates() {
        if g.is_barrier() {
            continue;
        }
        dm.apply_gate(g);
        if *noise != NoiseModel::PerGateDepolarizing {
            continue;
        }
        match *g {
            Gate::CX(a, b) => {
                let p = device
                    .two_qubit_error(layout.physical(a), layout.physical(b))
                    .unwrap();
                dm.depolarize(&[a, b], p);
            }
            _ => {
                let q = g.qubits()[0];
                dm.depolarize(&[q], device.one_qubit_error(layout.physical(q)));
            }
        }
    }
    if let NoiseModel::GlobalDepolarizing { p } = *noise {
        let dim = 1 << n;
        for r in 0..dim {
            for c in 0..dim {
                let mix = if r == c { p / dim as f64 } else { 0.0 };
                dm.rho[r * dim + c] = dm.rho[r * dim + c] * (1.0 - p) + mix;
            }
        }
    }
    observable
        .terms()
        .iter()
        .map(|(c, ps)| {
            let codes: Vec<usize> = (0..n)
                .map(|q| match (ps.x(q), ps.z(q)) {
                    (false, false) => 0,
                    (true, false) => 1,
                    (true, true) => 2,
                    (false, true) => 3,
                })
                .collect();
            c * ps.sign() * dm.pauli_expectation(&codes)
        })
        .sum()
}

/// Noiseless statevector.
pub fn statevector(circuit: &Circuit) -> Vec<C> {
    let mut psi = vec![O; 1 << circuit.num_qubits()];
    psi[0] = I1;
    for g in circuit.gates() {
        let (qs, m) = gate_matrix(g);
        if !qs.is_empty() {
            apply_local(&m, &qs, &mut psi);
        }
    }
    psi
}

/// Random Clifford circuit whose CX gates follow `edges`; rotations use
/// multiples of π/2.
pub fn random_clifford(n: usize, edges: &[(usize, usize)], len: usize, rng: &mut impl Rng) -> Circuit {
    let mut gates = Vec::with_capacity(len);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let angle = FRAC_PI_2 * rng.random_range(-3i32..=3) as f64;
        let g = match rng.random_range(0..10) {
            0 => Gate::H(q),
            1 => Gate::S(q),
            2 => Gate::Sdg(q),
            3 => Gate::X(q),
            4 => Gate::Y(q),
            5 => Gate::Z(q),
            6 => Gate::RZ(q, angle),
            7 => Gate::RX(q, angle),
            8 => Gate::RY(q, angle),
            _ if edges.is_empty() => Gate::H(q),
            _ => {
                let (a, b) = edges[rng.random_range(0..edges.len())];
                if rng.random_bool(0.5) {
                    Gate::CX(a, b)
                } else {
                    Gate::CX(b, a)
                }
            }
        };
        gates.push(g);
    }
    Circuit::from_gates(n, gates).unwrap()
}

/// Device with the given coupling graph and uniformly random error rates.
pub fn random_device(n: usize, edges: &[(usize, usize)], rng: &mut impl Rng) -> DeviceModel {
    let errors2: BTreeMap<(usize, usize), f64> = edges
        .iter()
        .map(|&(a, b)| (canonical_edge(a, b), rng.random_range(0.0..0.1)))
        .collect();
    let errors1 = (0..n).map(|_| rng.random_range(0.0..0.02)).collect();
    DeviceModel::new("random", n, edges.to_vec(), errors2, errors1).unwrap()
}

/// Random connected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(n: usize, extra: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        edges.insert(canonical_edge(u, v));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.insert(canonical_edge(a, b));
        }
    }
    edges.into_iter().collect()
}

/// All injective maps of `graph` into `device` preserving adjacency, by
/// trying every ordered selection of distinct physical qubits.
pub fn brute_force_layouts(k: usize, graph: &[(usize, usize)], device: &DeviceModel) -> BTreeSet<Vec<usize>> {
    let n = device.num_qubits();
    let mut out = BTreeSet::new();
    let mut current = Vec::with_capacity(k);
    let mut used = vec![false; n];
    fn rec(
        k: usize,
        n: usize,
        graph: &[(usize, usize)],
        device: &DeviceModel,
        current: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if current.len() == k {
            if graph
                .iter()
                .all(|&(a, b)| device.has_edge(current[a], current[b]))
            {
                out.insert(current.clone());
            }
            return;
        }
        for p in 0..n {
            if !used[p] {
                used[p] = true;
                current.push(p);
                rec(k, n, graph, device, current, used, out);
                current.pop();
                used[p] = false;
            }
        }
    }
    rec(k, n, graph, device, &mut current, &mut used, &mut out);
    out
}

/// Score table with dummy one-qubit layouts.
pub fn table(scores: &[f64]) -> ScoreTable {
    let entries = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| ScoredLayout {
            layout: Layout::new(vec![i]),
            score: s,
        })
        .collect();
    ScoreTable::new(ScoreMethod::FidelityProduct, entries).unwrap()
}

/// Straightforward double loop over `1 ≤ i < j ≤ m−1` (0-based) minimizing
/// `a(1 − j/(m−1)) + (1 − a)·δ_norm`; first minimum wins.
pub fn exhaustive_oracle(s: &[f64], a: f64) -> (usize, usize, f64) {
    let m = s.len();
    let delta = |i: usize, j: usize| ((s[0] - s[i]).abs() - (s[i] - s[j]).abs()).abs();
    let mut all = Vec::new();
    for i in 1..m {
        for j in i + 1..m {
            all.push(delta(i, j));
        }
    }
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best = (0, 0, f64::INFINITY);
    for i in 1..m {
        for j in i + 1..m {
            let dn = if hi > lo {
                (delta(i, j) - lo) / (hi - lo)
            } else {
                0.0
            };
            let cost = a * (1.0 - j as f64 / (m - 1) as f64) + (1.0 - a) * dn;
            if cost < best.2 {
                best = (i, j, cost);
            }
        }
    }
    best
}

/// Smallest `||s_i − s_last| − |s_1 − s_i||` over interior `i` (0-based
/// index and value).
pub fn linear_scan_oracle(s: &[f64]) -> (usize, f64) {
    let last = s.len() - 1;
    (1..last)
        .map(|i| (i, ((s[i] - s[0]) - (s[last] - s[i])).abs()))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
}
