mod common;

use std::collections::BTreeSet;

use common::*;
use ffzne::circuit::{interaction_graph, Circuit, Gate};
use ffzne::device::DeviceModel;
use ffzne::layout::{enumerate_circuit_layouts, enumerate_layouts, Layout};
use ffzne::selection::{select_binary, select_exhaustive};
use ffzne::sim::{
    exact_expval, make_observable, sampled_expval, NoiseModel, PauliObservable, PauliString, Tableau,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// A device containing a relabelled copy of the circuit's graph plus extra
/// couplings, and the layout of that copy.
fn host_device(
    k: usize,
    graph: &[(usize, usize)],
    extra: usize,
    rng: &mut impl Rng,
) -> (DeviceModel, Layout) {
    let n = k + rng.random_range(0..3);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges: BTreeSet<(usize, usize)> = graph
        .iter()
        .map(|&(a, b)| ffzne::device::canonical_edge(perm[a], perm[b]))
        .collect();
    for v in k..n {
        edges.insert(ffzne::device::canonical_edge(
            perm[v],
            perm[rng.random_range(0..v)],
        ));
    }
    for _ in 0..extra {
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.insert(ffzne::device::canonical_edge(a, b));
        }
    }
    let device = random_device(n, &edges.into_iter().collect::<Vec<_>>(), rng);
    (device, Layout::new(perm[..k].to_vec()))
}

fn random_pauli_observable(n: usize, rng: &mut impl Rng) -> PauliObservable {
    let terms = (0..3)
        .map(|_| {
            let text: String = (0..n)
                .map(|_| ['I', 'X', 'Y', 'Z'][rng.random_range(0..4)])
                .collect();
            let sign = if rng.random_bool(0.5) { "-" } else { "+" };
            (
                rng.random_range(-1.0..1.0),
                PauliString::parse(&format!("{sign}{text}")).unwrap(),
            )
        })
        .collect();
    PauliObservable::new(n, terms).unwrap()
}

#[test]
fn exact_matches_density_matrix() {
    let mut rng = rng(1);
    for case in 0..60 {
        let k = rng.random_range(2..=4);
        let graph = random_connected_graph(k, 1, &mut rng);
        let circuit = random_clifford(k, &graph, 25, &mut rng);
        let (device, layout) = host_device(k, &graph, 2, &mut rng);
        let layout = &layout;
        let observables = [
            make_observable(k, 1).unwrap(),
            make_observable(k, 2).unwrap(),
            random_pauli_observable(k, &mut rng),
        ];
        let noises = [
            NoiseModel::PerGateDepolarizing,
            NoiseModel::Ideal,
            NoiseModel::GlobalDepolarizing {
                p: rng.random_range(0.0..1.0),
            },
        ];
        for obs in &observables {
            for noise in &noises {
                let ours = exact_expval(&circuit, layout, &device, noise, obs).unwrap().mean;
                let reference = dense_expval(&circuit, layout, &device, noise, obs);
                assert!(
                    (ours - reference).abs() < 1e-12,
                    "case {case} {noise:?}: {ours} vs {reference}"
                );
            }
        }
    }
}

#[test]
fn clifford_rotations_match_their_matrices() {
    use std::f64::consts::FRAC_PI_2;
    for k in -4..=4 {
        let t = k as f64 * FRAC_PI_2;
        for g in [Gate::RX(0, t), Gate::RY(0, t), Gate::RZ(0, t)] {
            let lead = Circuit::from_gates(1, vec![Gate::H(0), Gate::S(0)]).unwrap();
            let mut with_rot = lead.gates().to_vec();
            with_rot.push(g.clone());
            let mut with_ops = lead.gates().to_vec();
            with_ops.extend(g.clifford_decomposition().unwrap());
            let a = statevector(&Circuit::from_gates(1, with_rot).unwrap());
            let b = statevector(&Circuit::from_gates(1, with_ops).unwrap());
            let overlap: num_complex::Complex64 = a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12, "{g}");
        }
    }
}

fn tableau_of(circuit: &Circuit) -> Tableau {
    let mut t = Tableau::zero_state(circuit.num_qubits());
    for g in circuit.gates() {
        for op in g.clifford_decomposition().unwrap() {
            t.apply(&op);
        }
    }
    t
}

#[test]
fn tableau_distribution_matches_statevector() {
    let mut rng = rng(2);
    for _ in 0..20 {
        let n = rng.random_range(1..=10);
        let graph = if n > 1 {
            random_connected_graph(n, 3, &mut rng)
        } else {
            vec![]
        };
        let circuit = random_clifford(n, &graph, 80, &mut rng);
        let reference: Vec<f64> = statevector(&circuit).iter().map(|a| a.norm_sqr()).collect();
        let sampler = tableau_of(&circuit).z_distribution();

        let exact = sampler.probabilities();
        for (p, q) in exact.iter().zip(&reference) {
            assert!((p - q).abs() < 1e-12);
        }

        let samples = 10_000;
        let mut counts = vec![0usize; 1 << n];
        for _ in 0..samples {
            let coins: Vec<bool> = (0..sampler.dimension()).map(|_| rng.random_bool(0.5)).collect();
            let bits = sampler.outcome(|k| coins[k]);
            let idx = (0..n).fold(0usize, |acc, q| {
                acc | ((bits[q / 64] >> (q % 64) & 1) as usize) << q
            });
            counts[idx] += 1;
        }
        let tv: f64 = counts
            .iter()
            .zip(&reference)
            .map(|(&c, p)| (c as f64 / samples as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.05, "total variation {tv} on {n} qubits");
    }
}

#[test]
fn sampled_mean_converges_to_exact() {
    let mut rng = rng(3);
    for _ in 0..4 {
        let k = rng.random_range(3..=5);
        let graph = random_connected_graph(k, 1, &mut rng);
        let circuit = random_clifford(k, &graph, 40, &mut rng);
        let (device, layout) = host_device(k, &graph, 1, &mut rng);
        let obs = make_observable(k, 2).unwrap();
        for noise in [
            NoiseModel::PerGateDepolarizing,
            NoiseModel::GlobalDepolarizing { p: 0.3 },
        ] {
            let exact = exact_expval(&circuit, &layout, &device, &noise, &obs)
                .unwrap()
                .mean;
            let est =
                sampled_expval(&circuit, &layout, &device, &noise, &obs, 1_000_000, rng.random()).unwrap();
            assert!(est.stderr < 1.1e-3);
            assert!(
                (est.mean - exact).abs() < 4.0 * est.stderr + 1e-12,
                "{noise:?}: {} ± {} vs {exact}",
                est.mean,
                est.stderr
            );
        }
    }
}

#[test]
fn layouts_match_brute_force() {
    let mut rng = rng(4);
    for _ in 0..80 {
        let n = rng.random_range(2..=7);
        let device = random_device(
            n,
            &random_connected_graph(n, rng.random_range(0..6), &mut rng),
            &mut rng,
        );
        let k = rng.random_range(2..=n.min(4));
        let graph = random_connected_graph(k, rng.random_range(0..2), &mut rng);
        let ig = ffzne::circuit::InteractionGraph::new(k, graph.iter().copied());
        let ours = enumerate_layouts(&ig, &device, None).unwrap();
        let got: BTreeSet<Vec<usize>> = ours.layouts.iter().map(|l| l.mapping().to_vec()).collect();
        assert_eq!(got.len(), ours.len(), "duplicates");
        assert_eq!(got, brute_force_layouts(k, &graph, &device));
        let sorted: Vec<&Layout> = ours.layouts.iter().collect();
        assert!(sorted.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn capped_enumeration_is_a_valid_subset() {
    let mut rng = rng(5);
    for _ in 0..30 {
        let n = rng.random_range(4..=7);
        let device = random_device(n, &random_connected_graph(n, 4, &mut rng), &mut rng);
        let graph = random_connected_graph(3, 0, &mut rng);
        let circuit = random_clifford(3, &graph, 10, &mut rng);
        if !interaction_graph(&circuit).is_connected() {
            continue;
        }
        let full = enumerate_circuit_layouts(&circuit, &device, None).unwrap();
        let cap = rng.random_range(1..=5);
        let capped = enumerate_circuit_layouts(&circuit, &device, Some(cap)).unwrap();
        assert_eq!(capped.len(), full.len().min(cap));
        assert_eq!(capped.truncated, full.len() > cap);
        assert!(capped.layouts.iter().all(|l| full.layouts.contains(l)));
    }
}

#[test]
fn exhaustive_matches_double_loop() {
    let mut rng = rng(6);
    for _ in 0..300 {
        let m = rng.random_range(3..60);
        let scores: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let t = table(&scores);
        let a = rng.random_range(0.0..1.0);
        let triple = select_exhaustive(&t, a).unwrap();
        let (i, j, cost) = exhaustive_oracle(&t.scores(), a);
        assert_eq!((triple.i, triple.j), (i + 1, j + 1));
        assert!((triple.cost.unwrap() - cost).abs() < 1e-12);
    }
}

#[test]
fn exhaustive_ties_pick_smallest_pair() {
    let t = table(&[0.1, 0.2, 0.2, 0.2, 0.3]);
    let triple = select_exhaustive(&t, 0.0).unwrap();
    let (i, j, _) = exhaustive_oracle(&t.scores(), 0.0);
    assert_eq!((triple.i, triple.j), (i + 1, j + 1));
}

#[test]
fn binary_reaches_linear_scan_optimum() {
    let mut rng = rng(7);
    for _ in 0..500 {
        let m = rng.random_range(3..500);
        let scores: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let t = table(&scores);
        let triple = select_binary(&t, 0.0).unwrap();
        let (_, best) = linear_scan_oracle(&t.scores());
        let got = ((triple.si - triple.s1) - (triple.sj - triple.si)).abs();
        assert!((got - best).abs() < 1e-12, "m={m}: {got} vs {best}");
        assert_eq!(triple.j, m);
    }
}
