//! Isomorphic layouts: embeddings of a circuit's interaction graph into the
//! device coupling graph.
//!
//! [`enumerate_layouts`] returns every injective, edge-preserving map
//! (monomorphism) in lexicographic order. [`truncate_by_overlap`] thins a
//! large set greedily so that kept layouts share fewer than `η` physical
//! qubits pairwise.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{interaction_graph, Circuit, InteractionGraph};
use crate::device::DeviceModel;
use crate::error::{Error, Result};

/// Virtual-to-physical assignment; entry `v` is the physical qubit of
/// virtual qubit `v`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Layout(Vec<usize>);

impl Layout {
    pub fn new(mapping: Vec<usize>) -> Self {
        Self(mapping)
    }

    /// The identity map on `n` qubits.
    pub fn trivial(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn mapping(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn physical(&self, v: usize) -> usize {
        self.0[v]
    }

    /// Check that the map is injective into the device and sends every
    /// interaction edge onto a coupling edge.
    pub fn validate(&self, graph: &InteractionGraph, device: &DeviceModel) -> Result<()> {
        if self.len() != graph.num_vertices {
            return Err(Error::Validation(format!(
                "layout maps {} qubits, circuit has {}",
                self.len(),
                graph.num_vertices
            )));
        }
        let mut used = vec![false; device.num_qubits()];
        for &p in &self.0 {
            if p >= device.num_qubits() {
                return Err(Error::Validation(format!(
                    "layout uses physical qubit {p}, device has {}",
                    device.num_qubits()
                )));
            }
            if std::mem::replace(&mut used[p], true) {
                return Err(Error::Validation(format!("layout maps two qubits to {p}")));
            }
        }
        for &(a, b) in &graph.edges {
            let (pa, pb) = (self.0[a], self.0[b]);
            if !device.has_edge(pa, pb) {
                return Err(Error::Validation(format!(
                    "interaction edge {a}-{b} lands on uncoupled pair {pa}-{pb}"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Canonically ordered, duplicate-free layouts of one circuit on one device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSet {
    pub device: String,
    pub circuit_hash: String,
    /// Set when enumeration stopped at the cap.
    pub truncated: bool,
    pub layouts: Vec<Layout>,
}

impl LayoutSet {
    pub fn len(&self) -> usize {
        self.layouts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layouts.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout set serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: LayoutSet = serde_json::from_str(text)?;
        if set.layouts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "layouts must be unique and in lexicographic order".into(),
            ));
        }
        Ok(set)
    }
}

pub fn load_layouts(path: impl AsRef<Path>) -> Result<LayoutSet> {
    LayoutSet::from_json(&fs::read_to_string(path)?)
}

pub fn save_layouts(set: &LayoutSet, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, set.to_json())?;
    Ok(())
}

/// Search plan: virtual vertices in matching order with, for each, the
/// earlier-placed neighbors its image must be adjacent to.
struct Plan {
    order: Vec<usize>,
    back_edges: Vec<Vec<usize>>,
    degree: Vec<usize>,
}

impl Plan {
    fn new(graph: &InteractionGraph) -> Self {
        let adj = graph.adjacency();
        let n = graph.num_vertices;
        let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
        let mut placed = vec![false; n];
        let mut links = vec![0usize; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| (links[v], degree[v], std::cmp::Reverse(v)))
                .expect("unplaced vertex");
            placed[v] = true;
            order.push(v);
            for &w in &adj[v] {
                links[w] += 1;
            }
        }
        let pos: Vec<usize> = {
            let mut pos = vec![0; n];
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
            pos
        };
        let back_edges = order
            .iter()
            .map(|&v| adj[v].iter().copied().filter(|&w| pos[w] < pos[v]).collect())
            .collect();
        Self {
            order,
            back_edges,
            degree,
        }
    }
}

struct Search<'a> {
    plan: &'a Plan,
    device: &'a DeviceModel,
    image: Vec<usize>,
    used: Vec<bool>,
    limit: usize,
    found: Vec<Layout>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        if depth == self.plan.order.len() {
            self.found.push(Layout(self.image.clone()));
            return;
        }
        let v = self.plan.order[depth];
        let back = &self.plan.back_edges[depth];
        // Connected graph, so every non-root vertex has a placed neighbor.
        let anchor = self.image[back[0]];
        for &p in self.device.neighbors(anchor) {
            if self.used[p]
                || self.device.degree(p) < self.plan.degree[v]
                || !back[1..].iter().all(|&u| self.device.has_edge(self.image[u], p))
            {
                continue;
            }
            self.place(v, p, depth);
        }
    }

    fn place(&mut self, v: usize, p: usize, depth: usize) {
        self.image[v] = p;
        self.used[p] = true;
        self.extend(depth + 1);
        self.used[p] = false;
    }

    fn from_root(plan: &Plan, device: &DeviceModel, root: usize, limit: usize) -> Vec<Layout> {
        let mut s = Search {
            plan,
            device,
            image: vec![usize::MAX; plan.order.len()],
            used: vec![false; device.num_qubits()],
            limit,
            found: Vec::new(),
        };
        s.place(plan.order[0], root, 0);
        s.found
    }
}

/// All monomorphisms of `graph` into the device coupling graph, sorted
/// lexicographically. With a `cap`, stops after `cap` layouts and sets
/// `truncated` if more exist.
pub fn enumerate_layouts(
    graph: &InteractionGraph,
    device: &DeviceModel,
    cap: Option<usize>,
) -> Result<LayoutSet> {
    if cap == Some(0) {
        return Err(Error::InvalidInput("layout cap must be positive".into()));
    }
    if !graph.is_connected() {
        return Err(Error::InvalidInput(
            "interaction graph must be connected to enumerate layouts".into(),
        ));
    }
    let plan = Plan::new(graph);
    let root_degree = plan.degree[plan.order[0]];
    let roots: Vec<usize> = (0..device.num_qubits())
        .filter(|&p| device.degree(p) >= root_degree)
        .collect();
    let (mut layouts, truncated) = match cap {
        None => {
            let parts: Vec<Vec<Layout>> = roots
                .par_iter()
                .map(|&r| Search::from_root(&plan, device, r, usize::MAX))
                .collect();
            (parts.into_iter().flatten().collect::<Vec<_>>(), false)
        }
        Some(cap) => {
            let mut out = Vec::new();
            for &r in &roots {
                out.extend(Search::from_root(&plan, device, r, cap + 1 - out.len()));
                if out.len() > cap {
                    break;
                }
            }
            let truncated = out.len() > cap;
            out.truncate(cap);
            (out, truncated)
        }
    };
    layouts.sort_unstable();
    Ok(LayoutSet {
        device: device.name().to_string(),
        circuit_hash: String::new(),
        truncated,
        layouts,
    })
}

/// [`enumerate_layouts`] on the circuit's interaction graph, stamped with
/// the circuit hash.
pub fn enumerate_circuit_layouts(
    circuit: &Circuit,
    device: &DeviceModel,
    cap: Option<usize>,
) -> Result<LayoutSet> {
    let mut set = enumerate_layouts(&interaction_graph(circuit), device, cap)?;
    set.circuit_hash = circuit.content_hash();
    Ok(set)
}

/// Number of physical qubits used by both layouts.
pub fn overlap(l1: &Layout, l2: &Layout) -> usize {
    let mut a = l1.0.clone();
    let mut b = l2.0.clone();
    a.sort_unstable();
    b.sort_unstable();
    let (mut i, mut j, mut shared) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                shared += 1;
                i += 1;
                j += 1;
            }
        }
    }
    shared
}

fn image_bits(l: &Layout, words: usize) -> Vec<u64> {
    let mut bits = vec![0u64; words];
    for &p in &l.0 {
        bits[p / 64] |= 1 << (p % 64);
    }
    bits
}

/// Greedy pass in canonical order keeping a layout iff it shares fewer than
/// `eta` physical qubits with every layout kept so far.
pub fn truncate_by_overlap(set: &LayoutSet, eta: usize) -> Result<LayoutSet> {
    if eta == 0 {
        return Err(Error::InvalidInput("overlap threshold η must be >= 1".into()));
    }
    let top = set
        .layouts
        .iter()
        .flat_map(|l| l.0.iter().copied())
        .max()
        .unwrap_or(0);
    let words = top / 64 + 1;
    let mut kept: Vec<(usize, Vec<u64>)> = Vec::new();
    for (i, l) in set.layouts.iter().enumerate() {
        let bits = image_bits(l, words);
        let clashes = kept.iter().any(|(_, k)| {
            let shared: u32 = k.iter().zip(&bits).map(|(a, b)| (a & b).count_ones()).sum();
            shared as usize >= eta
        });
        if !clashes {
            kept.push((i, bits));
        }
    }
    Ok(LayoutSet {
        device: set.device.clone(),
        circuit_hash: set.circuit_hash.clone(),
        truncated: set.truncated,
        layouts: kept.into_iter().map(|(i, _)| set.layouts[i].clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> DeviceModel {
        let edges = (0..n - 1).map(|i| (i, i + 1)).collect();
        DeviceModel::uniform("line", n, edges, 0.01, 0.001).unwrap()
    }

    fn path_graph(n: usize) -> InteractionGraph {
        InteractionGraph::new(n, (0..n - 1).map(|i| (i, i + 1)))
    }

    #[test]
    fn path_into_line() {
        let set = enumerate_layouts(&path_graph(3), &line(4), None).unwrap();
        let maps: Vec<_> = set.layouts.iter().map(|l| l.mapping().to_vec()).collect();
        assert_eq!(
            maps,
            vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 1, 0], vec![3, 2, 1]]
        );
        assert!(!set.truncated);
    }

    #[test]
    fn triangle_and_star() {
        let tri = InteractionGraph::new(3, [(0, 1), (1, 2), (0, 2)]);
        let dev = DeviceModel::uniform("tri", 3, vec![(0, 1), (1, 2), (0, 2)], 0.01, 0.0).unwrap();
        assert_eq!(enumerate_layouts(&tri, &dev, None).unwrap().len(), 6);
        let star = DeviceModel::uniform("star", 3, vec![(0, 1), (0, 2)], 0.01, 0.0).unwrap();
        let set = enumerate_layouts(&path_graph(3), &star, None).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.layouts.iter().all(|l| l.physical(1) == 0));
        assert!(enumerate_layouts(&tri, &star, None).unwrap().is_empty());
    }

    #[test]
    fn cap_sets_flag() {
        assert!(enumerate_layouts(&path_graph(3), &line(4), Some(0)).is_err());
        let set = enumerate_layouts(&path_graph(3), &line(6), Some(3)).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.truncated);
        let set = enumerate_layouts(&path_graph(3), &line(4), Some(4)).unwrap();
        assert!(!set.truncated);
    }

    #[test]
    fn disconnected_graph_rejected() {
        let g = InteractionGraph::new(4, [(0, 1), (2, 3)]);
        assert!(enumerate_layouts(&g, &line(6), None).is_err());
    }

    #[test]
    fn overlap_examples() {
        let a = Layout::new(vec![0, 1, 2]);
        assert_eq!(overlap(&a, &a), 3);
        assert_eq!(overlap(&a, &Layout::new(vec![2, 3, 4])), 1);
        assert_eq!(overlap(&a, &Layout::new(vec![5, 3, 4])), 0);
    }

    #[test]
    fn truncation_greedy() {
        let set = enumerate_layouts(&path_graph(3), &line(9), None).unwrap();
        assert_eq!(truncate_by_overlap(&set, 4).unwrap(), set);
        let t = truncate_by_overlap(&set, 1).unwrap();
        for (i, a) in t.layouts.iter().enumerate() {
            for b in &t.layouts[i + 1..] {
                assert_eq!(overlap(a, b), 0);
            }
        }
        assert_eq!(t.layouts[0], set.layouts[0]);
        assert!(truncate_by_overlap(&set, 0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut set = enumerate_layouts(&path_graph(2), &line(3), None).unwrap();
        set.circuit_hash = "abc".into();
        assert_eq!(LayoutSet::from_json(&set.to_json()).unwrap(), set);
        let text = r#"{"device":"d","circuit_hash":"","truncated":false,"layouts":[[1,0],[0,1]]}"#;
        assert!(LayoutSet::from_json(text).is_err());
    }

    #[test]
    fn validate_catches_bad_maps() {
        let g = path_graph(3);
        let dev = line(4);
        assert!(Layout::new(vec![0, 1, 2]).validate(&g, &dev).is_ok());
        assert!(Layout::new(vec![0, 2, 3]).validate(&g, &dev).is_err());
        assert!(Layout::new(vec![0, 1, 0]).validate(&g, &dev).is_err());
        assert!(Layout::new(vec![0, 1, 9]).validate(&g, &dev).is_err());
        assert!(Layout::new(vec![0, 1]).validate(&g, &dev).is_err());
    }
}
