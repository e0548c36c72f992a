//! Hardware model: coupling graph plus per-gate calibration errors.
//!
//! A [`DeviceModel`] is the substrate layouts are embedded into. Two-qubit
//! errors live on coupling edges, one-qubit errors on qubits; together they
//! determine the noise a circuit experiences on a given layout.
//!
//! Synthetic devices come from [`generate_device`]. Errors are drawn
//! log-normally around a median so that isomorphic layouts see a spread of
//! aggregate noise, and a fraction of edges can be marked dead (error 0.999).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Error value assigned to dead couplings.
pub const DEAD_ERROR: f64 = 0.999;
/// Lower clamp applied to generated error rates.
pub const MIN_ERROR: f64 = 1e-5;

/// Canonical (min, max) ordering of an undirected edge.
pub fn canonical_edge(a: usize, b: usize) -> (usize, usize) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Coupling graph and calibration data of a device. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceModel {
    name: String,
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
    two_qubit_error: BTreeMap<(usize, usize), f64>,
    one_qubit_error: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
}

impl DeviceModel {
    /// Build a device, checking every invariant.
    ///
    /// Edges may be given in either orientation; they are stored canonically
    /// and sorted.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        edges: Vec<(usize, usize)>,
        two_qubit_error: BTreeMap<(usize, usize), f64>,
        one_qubit_error: Vec<f64>,
    ) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::Validation("device must have at least one qubit".into()));
        }
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::Validation(format!(
                    "edge {a}-{b} has an endpoint outside 0..{num_qubits}"
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("self-loop on qubit {a}")));
            }
            if !seen.insert(canonical_edge(a, b)) {
                let (a, b) = canonical_edge(a, b);
                return Err(Error::Validation(format!("duplicate edge {a}-{b}")));
            }
        }
        let mut errors2 = BTreeMap::new();
        for (&(a, b), &p) in &two_qubit_error {
            let key = canonical_edge(a, b);
            if !seen.contains(&key) {
                return Err(Error::Validation(format!(
                    "two_qubit_error given for {}-{}, which is not an edge",
                    key.0, key.1
                )));
            }
            check_probability(p, &format!("two_qubit_error[{}-{}]", key.0, key.1))?;
            if errors2.insert(key, p).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate two_qubit_error entry for {}-{}",
                    key.0, key.1
                )));
            }
        }
        for &(a, b) in &seen {
            if !errors2.contains_key(&(a, b)) {
                return Err(Error::Validation(format!(
                    "edge {a}-{b} has no two_qubit_error entry"
                )));
            }
        }
        if one_qubit_error.len() != num_qubits {
            return Err(Error::Validation(format!(
                "one_qubit_error has {} entries for {num_qubits} qubits",
                one_qubit_error.len()
            )));
        }
        for (q, &p) in one_qubit_error.iter().enumerate() {
            check_probability(p, &format!("one_qubit_error[{q}]"))?;
        }

        let edges: Vec<(usize, usize)> = seen.into_iter().collect();
        let mut adjacency = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            name: name.into(),
            num_qubits,
            edges,
            two_qubit_error: errors2,
            one_qubit_error,
            adjacency,
        })
    }

    /// Device with the same error on every edge and every qubit.
    pub fn uniform(
        name: impl Into<String>,
        num_qubits: usize,
        edges: Vec<(usize, usize)>,
        eps2: f64,
        eps1: f64,
    ) -> Result<Self> {
        let errors2 = edges.iter().map(|&(a, b)| (canonical_edge(a, b), eps2)).collect();
        Self::new(name, num_qubits, edges, errors2, vec![eps1; num_qubits])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Canonical, sorted edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn degree(&self, q: usize) -> usize {
        self.adjacency[q].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.num_qubits && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Error of the coupling between `a` and `b`, if they are coupled.
    pub fn two_qubit_error(&self, a: usize, b: usize) -> Option<f64> {
        self.two_qubit_error.get(&canonical_edge(a, b)).copied()
    }

    pub fn one_qubit_error(&self, q: usize) -> f64 {
        self.one_qubit_error[q]
    }

    pub fn two_qubit_errors(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.two_qubit_error
    }

    pub fn one_qubit_errors(&self) -> &[f64] {
        &self.one_qubit_error
    }

    /// Copy of this device with one coupling error replaced.
    pub fn with_two_qubit_error(&self, a: usize, b: usize, p: f64) -> Result<Self> {
        let key = canonical_edge(a, b);
        if !self.two_qubit_error.contains_key(&key) {
            return Err(Error::InvalidInput(format!("{a}-{b} is not an edge")));
        }
        let mut errors = self.two_qubit_error.clone();
        errors.insert(key, p);
        Self::new(
            self.name.clone(),
            self.num_qubits,
            self.edges.clone(),
            errors,
            self.one_qubit_error.clone(),
        )
    }

    /// Copy of this device with one qubit error replaced.
    pub fn with_one_qubit_error(&self, q: usize, p: f64) -> Result<Self> {
        if q >= self.num_qubits {
            return Err(Error::InvalidInput(format!("qubit {q} out of range")));
        }
        let mut errors = self.one_qubit_error.clone();
        errors[q] = p;
        Self::new(
            self.name.clone(),
            self.num_qubits,
            self.edges.clone(),
            self.two_qubit_error.clone(),
            errors,
        )
    }

    /// Copy of this device with every error set to zero.
    pub fn noiseless(&self) -> Self {
        let errors = self.two_qubit_error.keys().map(|&k| (k, 0.0)).collect();
        Self::new(
            self.name.clone(),
            self.num_qubits,
            self.edges.clone(),
            errors,
            vec![0.0; self.num_qubits],
        )
        .expect("zeroing errors preserves invariants")
    }

    /// True when the coupling graph is connected.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_qubits];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(q) = stack.pop() {
            for &r in &self.adjacency[q] {
                if !seen[r] {
                    seen[r] = true;
                    count += 1;
                    stack.push(r);
                }
            }
        }
        count == self.num_qubits
    }

    pub fn to_json(&self) -> String {
        let file = DeviceFile {
            name: self.name.clone(),
            num_qubits: self.num_qubits,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            two_qubit_error: self
                .two_qubit_error
                .iter()
                .map(|(&(a, b), &p)| (format!("{a}-{b}"), p))
                .collect(),
            one_qubit_error: self
                .one_qubit_error
                .iter()
                .enumerate()
                .map(|(q, &p)| (q.to_string(), p))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("device serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: DeviceFile = serde_json::from_str(text)?;
        let mut errors2 = BTreeMap::new();
        for (key, &p) in &file.two_qubit_error {
            let edge = parse_edge_key(key)?;
            if errors2.insert(edge, p).is_some() {
                return Err(Error::Validation(format!(
                    "two_qubit_error key `{key}` duplicates another entry"
                )));
            }
        }
        let mut errors1 = vec![None; file.num_qubits];
        for (key, &p) in &file.one_qubit_error {
            let q: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("one_qubit_error: key `{key}` is not a qubit index")))?;
            if q >= file.num_qubits {
                return Err(Error::Validation(format!(
                    "one_qubit_error: qubit {q} outside 0..{}",
                    file.num_qubits
                )));
            }
            errors1[q] = Some(p);
        }
        let errors1 = errors1
            .into_iter()
            .enumerate()
            .map(|(q, p)| {
                p.ok_or_else(|| Error::Validation(format!("one_qubit_error: missing entry for qubit {q}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let edges = file.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::new(file.name, file.num_qubits, edges, errors2, errors1)
    }
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if !p.is_finite() || !(0.0..1.0).contains(&p) {
        return Err(Error::Validation(format!(
            "{what} = {p} is not a probability in [0, 1)"
        )));
    }
    Ok(())
}

fn parse_edge_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("two_qubit_error: key `{key}` is not of the form `i-j`"));
    let (a, b) = key.split_once('-').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    Ok(canonical_edge(a, b))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    name: String,
    num_qubits: usize,
    edges: Vec<[usize; 2]>,
    two_qubit_error: BTreeMap<String, f64>,
    one_qubit_error: BTreeMap<String, f64>,
}

pub fn load_device(path: impl AsRef<Path>) -> Result<DeviceModel> {
    DeviceModel::from_json(&fs::read_to_string(path)?)
}

pub fn save_device(model: &DeviceModel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_json())?;
    Ok(())
}

/// Coupling-graph shape of a synthetic device.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Topology {
    /// Hexagonal lattice of `rows` x `cols` cells with a qubit on every
    /// vertex and every edge.
    HeavyHex {
        rows: usize,
        cols: usize,
    },
    Ring {
        n: usize,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    Line {
        n: usize,
    },
}

impl Topology {
    /// Qubit count and canonical edge list.
    pub fn build(&self) -> Result<(usize, Vec<(usize, usize)>)> {
        match *self {
            Topology::HeavyHex { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::InvalidInput("heavy-hex needs rows, cols >= 1".into()));
                }
                Ok(heavy_hex(rows, cols))
            }
            Topology::Ring { n } => {
                if n < 3 {
                    return Err(Error::InvalidInput("ring needs at least 3 qubits".into()));
                }
                Ok((n, (0..n).map(|i| canonical_edge(i, (i + 1) % n)).collect()))
            }
            Topology::Grid { rows, cols } => {
                if rows == 0 || cols == 0 {
                    return Err(Error::InvalidInput("grid needs rows, cols >= 1".into()));
                }
                let idx = |r: usize, c: usize| r * cols + c;
                let mut edges = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        if c + 1 < cols {
                            edges.push((idx(r, c), idx(r, c + 1)));
                        }
                        if r + 1 < rows {
                            edges.push((idx(r, c), idx(r + 1, c)));
                        }
                    }
                }
                Ok((rows * cols, edges))
            }
            Topology::Line { n } => {
                if n == 0 {
                    return Err(Error::InvalidInput("line needs at least 1 qubit".into()));
                }
                Ok((n, (1..n).map(|i| (i - 1, i)).collect()))
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Topology::HeavyHex { rows, cols } => format!("heavy-hex-{rows}x{cols}"),
            Topology::Ring { n } => format!("ring-{n}"),
            Topology::Grid { rows, cols } => format!("grid-{rows}x{cols}"),
            Topology::Line { n } => format!("line-{n}"),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    /// Parse a label such as `heavy-hex-4x4`, `grid-3x3`, `ring-12` or
    /// `line-5`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse topology `{s}`"));
        let (kind, size) = s.rsplit_once('-').ok_or_else(bad)?;
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        let pair = || -> Result<(usize, usize)> {
            let (r, c) = size.split_once('x').ok_or_else(bad)?;
            Ok((num(r)?, num(c)?))
        };
        match kind {
            "heavy-hex" => pair().map(|(rows, cols)| Topology::HeavyHex { rows, cols }),
            "grid" => pair().map(|(rows, cols)| Topology::Grid { rows, cols }),
            "ring" => num(size).map(|n| Topology::Ring { n }),
            "line" => num(size).map(|n| Topology::Line { n }),
            _ => Err(bad()),
        }
    }
}

/// Heavy-hex lattice: a hexagonal lattice of `rows` x `cols` hexagons with
/// every edge subdivided by an extra qubit.
fn heavy_hex(rows: usize, cols: usize) -> (usize, Vec<(usize, usize)>) {
    // Hexagonal lattice as columns of 2*rows+2 vertices with two corners
    // removed; horizontal rungs join (i, j)-(i+1, j) when i and j share parity.
    let height = 2 * rows + 2;
    let removed = [(0, height - 1), (cols, (height - 1) * (cols % 2))];
    let mut index = BTreeMap::new();
    for i in 0..=cols {
        for j in 0..height {
            if !removed.contains(&(i, j)) {
                let next = index.len();
                index.insert((i, j), next);
            }
        }
    }
    let mut hex_edges = Vec::new();
    for i in 0..=cols {
        for j in 0..height - 1 {
            if let (Some(&a), Some(&b)) = (index.get(&(i, j)), index.get(&(i, j + 1))) {
                hex_edges.push((a, b));
            }
        }
    }
    for i in 0..cols {
        for j in 0..height {
            if i % 2 == j % 2 {
                if let (Some(&a), Some(&b)) = (index.get(&(i, j)), index.get(&(i + 1, j))) {
                    hex_edges.push((a, b));
                }
            }
        }
    }
    let mut n = index.len();
    let mut edges = Vec::with_capacity(2 * hex_edges.len());
    for (a, b) in hex_edges {
        let mid = n;
        n += 1;
        edges.push(canonical_edge(a, mid));
        edges.push(canonical_edge(mid, b));
    }
    edges.sort_unstable();
    (n, edges)
}

/// Parameters of a synthetic device.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceGenSpec {
    pub topology: Topology,
    /// Median two-qubit error.
    pub eps2: f64,
    /// Log-normal dispersion of two-qubit errors.
    pub sigma2: f64,
    /// Median one-qubit error.
    pub eps1: f64,
    /// Log-normal dispersion of one-qubit errors.
    pub sigma1: f64,
    /// Fraction of couplings set to [`DEAD_ERROR`].
    pub dead_fraction: f64,
    pub seed: u64,
}

impl DeviceGenSpec {
    pub fn new(topology: Topology) -> Self {
        Self {
            topology,
            eps2: 0.01,
            sigma2: 0.5,
            eps1: 0.001,
            sigma1: 0.5,
            dead_fraction: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, m) in [("eps2", self.eps2), ("eps1", self.eps1)] {
            if !(m > 0.0 && m < 0.5) {
                return Err(Error::InvalidInput(format!("{name} = {m} must lie in (0, 0.5)")));
            }
        }
        for (name, s) in [("sigma2", self.sigma2), ("sigma1", self.sigma1)] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} = {s} must be >= 0")));
            }
        }
        if !(0.0..=0.2).contains(&self.dead_fraction) {
            return Err(Error::InvalidInput(format!(
                "dead_fraction = {} must lie in [0, 0.2]",
                self.dead_fraction
            )));
        }
        Ok(())
    }
}

/// Generate a synthetic device. Deterministic in `spec.seed`.
pub fn generate_device(spec: &DeviceGenSpec) -> Result<DeviceModel> {
    spec.validate()?;
    let (n, edges) = spec.topology.build()?;
    let mut rng = rng::stream(spec.seed, &[0xde71ce]);
    let mut draw = |median: f64, sigma: f64| -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (median * (sigma * z).exp()).clamp(MIN_ERROR, DEAD_ERROR)
    };
    let mut two: Vec<f64> = edges.iter().map(|_| draw(spec.eps2, spec.sigma2)).collect();
    let one: Vec<f64> = (0..n).map(|_| draw(spec.eps1, spec.sigma1)).collect();
    let dead = (spec.dead_fraction * edges.len() as f64).floor() as usize;
    if dead > 0 {
        for k in sample(&mut rng, edges.len(), dead) {
            two[k] = DEAD_ERROR;
        }
    }
    let errors2 = edges.iter().copied().zip(two).collect();
    let name = format!("{}-s{}", spec.topology.label(), spec.seed);
    DeviceModel::new(name, n, edges, errors2, one)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_labels_parse() {
        for t in [
            Topology::HeavyHex { rows: 4, cols: 4 },
            Topology::Grid { rows: 2, cols: 3 },
            Topology::Ring { n: 12 },
            Topology::Line { n: 5 },
        ] {
            assert_eq!(t.label().parse::<Topology>().unwrap(), t);
        }
        assert!("hex-4".parse::<Topology>().is_err());
        assert!("grid-4".parse::<Topology>().is_err());
    }

    fn line4() -> DeviceGenSpec {
        DeviceGenSpec {
            sigma2: 0.0,
            seed: 7,
            ..DeviceGenSpec::new(Topology::Line { n: 4 })
        }
    }

    #[test]
    fn zero_dispersion_forces_median() {
        let dev = generate_device(&line4()).unwrap();
        assert_eq!(dev.num_qubits(), 4);
        assert_eq!(dev.edges().len(), 3);
        assert!(dev.two_qubit_errors().values().all(|&p| p == 0.01));
    }

    #[test]
    fn ring_without_dead_edges() {
        let dev = generate_device(&DeviceGenSpec::new(Topology::Ring { n: 3 })).unwrap();
        assert_eq!(dev.edges().len(), 3);
        assert!(dev.two_qubit_errors().values().all(|&p| p < DEAD_ERROR));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = DeviceGenSpec {
            seed: 1,
            ..DeviceGenSpec::new(Topology::HeavyHex { rows: 3, cols: 3 })
        };
        let a = generate_device(&spec).unwrap();
        let b = generate_device(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn dead_fraction_marks_exact_count() {
        let spec = DeviceGenSpec {
            dead_fraction: 0.1,
            ..DeviceGenSpec::new(Topology::HeavyHex { rows: 2, cols: 2 })
        };
        let dev = generate_device(&spec).unwrap();
        let expected = (0.1 * dev.edges().len() as f64).floor() as usize;
        let dead = dev
            .two_qubit_errors()
            .values()
            .filter(|&&p| p == DEAD_ERROR)
            .count();
        assert_eq!(dead, expected);
    }

    #[test]
    fn heavy_hex_shape() {
        // One hexagon: 6 vertices, 6 subdivided edges.
        let (n, edges) = heavy_hex(1, 1);
        assert_eq!(n, 12);
        assert_eq!(edges.len(), 12);
        for (rows, cols) in [(1, 1), (2, 3), (3, 3), (4, 4)] {
            let dev = DeviceModel::uniform(
                "hh",
                heavy_hex(rows, cols).0,
                heavy_hex(rows, cols).1,
                0.01,
                0.001,
            )
            .unwrap();
            assert!(dev.is_connected());
            assert_eq!(dev.max_degree(), if rows * cols > 1 { 3 } else { 2 });
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_device(&DeviceGenSpec::new(Topology::Line { n: 0 })).is_err());
        assert!(generate_device(&DeviceGenSpec::new(Topology::Grid { rows: 0, cols: 3 })).is_err());
        let mut spec = DeviceGenSpec::new(Topology::Line { n: 3 });
        spec.eps2 = 0.6;
        assert!(generate_device(&spec).is_err());
        spec.eps2 = 0.01;
        spec.dead_fraction = 0.3;
        assert!(generate_device(&spec).is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = DeviceGenSpec::new(Topology::HeavyHex { rows: 2, cols: 2 });
        let dev = generate_device(&spec).unwrap();
        let back = DeviceModel::from_json(&dev.to_json()).unwrap();
        assert_eq!(dev, back);
    }

    #[test]
    fn json_rejects_out_of_range_probability() {
        let text = r#"{"name":"x","num_qubits":2,"edges":[[0,1]],
            "two_qubit_error":{"0-1":1.2},"one_qubit_error":{"0":0.001,"1":0.001}}"#;
        let err = DeviceModel::from_json(text).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn json_rejects_duplicate_edge() {
        let text = r#"{"name":"x","num_qubits":2,"edges":[[0,1],[1,0]],
            "two_qubit_error":{"0-1":0.01},"one_qubit_error":{"0":0.001,"1":0.001}}"#;
        let err = DeviceModel::from_json(text).unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
    }

    #[test]
    fn json_names_missing_field() {
        let text = r#"{"name":"x","num_qubits":2,"two_qubit_error":{},"one_qubit_error":{}}"#;
        let err = DeviceModel::from_json(text).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("edges"), "{err}");
    }
}
