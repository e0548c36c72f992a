//! Layout noise scores.
//!
//! A score in `[0, 1]` estimates the aggregate noise a circuit sees on a
//! layout; lower is better. The fidelity-product score multiplies gate
//! fidelities. The QIC score runs a shallow mirrored identity circuit with
//! the target's two-qubit connectivity and reports its failure probability.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{interaction_graph, Circuit, Gate};
use crate::device::{DeviceModel, DEAD_ERROR};
use crate::error::{Error, Result};
use crate::layout::{Layout, LayoutSet};
use crate::rng;
use crate::sim::{sampled_zero_probability, zero_probability, NoiseModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMethod {
    FidelityProduct,
    Qic,
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMethod::FidelityProduct => "fidelity-product",
            ScoreMethod::Qic => "qic",
        })
    }
}

impl FromStr for ScoreMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fp" | "fidelity-product" => Ok(ScoreMethod::FidelityProduct),
            "qic" => Ok(ScoreMethod::Qic),
            other => Err(Error::InvalidInput(format!(
                "unknown score method `{other}` (expected fp or qic)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoredLayout {
    pub layout: Layout,
    pub score: f64,
}

/// Scored layouts in ascending score order, ties in canonical layout order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreTable {
    pub method: ScoreMethod,
    pub entries: Vec<ScoredLayout>,
    /// Mean of the raw scores, before filtering.
    pub mean: f64,
    /// Population standard deviation of the raw scores, before filtering.
    pub stddev: f64,
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn sort_entries(entries: &mut [ScoredLayout]) {
    entries.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.layout.cmp(&b.layout)));
}

impl ScoreTable {
    /// Sort the entries and record their statistics.
    pub fn new(method: ScoreMethod, mut entries: Vec<ScoredLayout>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| !e.score.is_finite()) {
            return Err(Error::Validation(format!(
                "layout {} has score {}",
                e.layout, e.score
            )));
        }
        sort_entries(&mut entries);
        let scores: Vec<f64> = entries.iter().map(|e| e.score).collect();
        let (mean, stddev) = mean_std(&scores);
        Ok(Self {
            method,
            entries,
            mean,
            stddev,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("score table serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: ScoreTable = serde_json::from_str(text)?;
        let sorted = table
            .entries
            .windows(2)
            .all(|w| w[0].score < w[1].score || (w[0].score == w[1].score && w[0].layout < w[1].layout));
        if !sorted {
            return Err(Error::Validation(
                "entries must be sorted by (score, layout)".into(),
            ));
        }
        Ok(table)
    }
}

pub fn load_scores(path: impl AsRef<Path>) -> Result<ScoreTable> {
    ScoreTable::from_json(&fs::read_to_string(path)?)
}

pub fn save_scores(table: &ScoreTable, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, table.to_json())?;
    Ok(())
}

/// `1 − Π(1 − ε_g)` over every non-barrier gate occurrence, with `ε_g` the
/// error of the physical qubit or edge the gate lands on.
pub fn score_fidelity_product(circuit: &Circuit, layout: &Layout, device: &DeviceModel) -> Result<f64> {
    layout.validate(&interaction_graph(circuit), device)?;
    let mut fidelity = 1.0;
    for g in circuit.gates() {
        let eps = match *g {
            Gate::Barrier(_) => continue,
            Gate::CX(a, b) => device
                .two_qubit_error(layout.physical(a), layout.physical(b))
                .expect("validated layout"),
            _ => device.one_qubit_error(layout.physical(g.qubits()[0])),
        };
        fidelity *= 1.0 - eps;
    }
    Ok(1.0 - fidelity)
}

/// Quality indicator circuit: H on every qubit, one CX per interaction edge
/// in canonical order, the same CX list reversed, H on every qubit. It is
/// the identity, so its ideal outcome is `|0…0⟩`.
pub fn build_qic(circuit: &Circuit) -> Circuit {
    let n = circuit.num_qubits();
    let edges = interaction_graph(circuit).edges;
    let mut qic = Circuit::new(n);
    qic.extend((0..n).map(Gate::H));
    qic.extend(edges.iter().map(|&(a, b)| Gate::CX(a, b)));
    qic.extend(edges.iter().rev().map(|&(a, b)| Gate::CX(a, b)));
    qic.extend((0..n).map(Gate::H));
    qic
}

fn layout_seed(seed: u64, layout: &Layout) -> u64 {
    let words: Vec<u64> = layout.mapping().iter().map(|&p| p as u64).collect();
    rng::derive_seed(seed, &words)
}

/// `1 − P(all zeros)` of the QIC on the layout under per-gate noise.
/// `shots == 0` computes the probability exactly (up to 16 qubits);
/// otherwise it is estimated from `shots` samples seeded by the layout.
pub fn score_qic(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    qic_score(&build_qic(circuit), layout, device, shots, seed)
}

fn qic_score(qic: &Circuit, layout: &Layout, device: &DeviceModel, shots: u64, seed: u64) -> Result<f64> {
    let noise = NoiseModel::PerGateDepolarizing;
    let p0 = if shots == 0 {
        zero_probability(qic, layout, device, &noise)?
    } else {
        sampled_zero_probability(qic, layout, device, &noise, shots, layout_seed(seed, layout))?
    };
    Ok((1.0 - p0).clamp(0.0, 1.0))
}

/// Score every layout of `set` in parallel.
pub fn score_layouts(
    circuit: &Circuit,
    set: &LayoutSet,
    device: &DeviceModel,
    method: ScoreMethod,
    shots: u64,
    seed: u64,
) -> Result<ScoreTable> {
    let qic = build_qic(circuit);
    let entries = set
        .layouts
        .par_iter()
        .map(|l| {
            let score = match method {
                ScoreMethod::FidelityProduct => score_fidelity_product(circuit, l, device)?,
                ScoreMethod::Qic => {
                    l.validate(&interaction_graph(circuit), device)?;
                    qic_score(&qic, l, device, shots, seed)?
                }
            };
            Ok(ScoredLayout {
                layout: l.clone(),
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScoreTable::new(method, entries)
}

/// Drop scores `≥ 0.999`, then drop scores above `μ + 3σ` of the rest.
/// Statistics of the input table are carried over unchanged.
pub fn filter_scores(table: &ScoreTable) -> Result<ScoreTable> {
    if table.is_empty() {
        return Err(Error::InvalidInput("cannot filter an empty score table".into()));
    }
    let alive: Vec<&ScoredLayout> = table.entries.iter().filter(|e| e.score < DEAD_ERROR).collect();
    let scores: Vec<f64> = alive.iter().map(|e| e.score).collect();
    let (mu, sigma) = mean_std(&scores);
    let mut entries: Vec<ScoredLayout> = alive
        .into_iter()
        .filter(|e| e.score <= mu + 3.0 * sigma)
        .cloned()
        .collect();
    if entries.len() < 3 {
        return Err(Error::InsufficientLayouts(entries.len()));
    }
    sort_entries(&mut entries);
    Ok(ScoreTable {
        method: table.method,
        entries,
        mean: table.mean,
        stddev: table.stddev,
    })
}
