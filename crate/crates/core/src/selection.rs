//! Choice of three layouts whose scores are close to an arithmetic
//! progression `s₁, sᵢ, sⱼ`.
//!
//! Indices are 0-based in code and 1-based in serialized triples.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::scoring::ScoreTable;

/// Default trade-off between coverage and progression defect.
pub const DEFAULT_A: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionStrategy {
    Exhaustive,
    Binary,
}

impl fmt::Display for SelectionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionStrategy::Exhaustive => "exhaustive",
            SelectionStrategy::Binary => "binary",
        })
    }
}

impl FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(SelectionStrategy::Exhaustive),
            "binary" => Ok(SelectionStrategy::Binary),
            other => Err(Error::InvalidInput(format!(
                "unknown strategy `{other}` (expected exhaustive or binary)"
            ))),
        }
    }
}

/// Selected layouts and diagnostics. `i` and `j` are 1-based positions in
/// the score table; the first layout is always position 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTriple {
    pub method: SelectionStrategy,
    pub i: usize,
    pub j: usize,
    pub l1: Layout,
    pub li: Layout,
    pub lj: Layout,
    pub s1: f64,
    pub si: f64,
    pub sj: f64,
    /// `||sᵢ − sⱼ| − |s₁ − sᵢ||`.
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_norm: Option<f64>,
    /// Midpoint evaluations of the binary search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
}

impl SelectionTriple {
    fn from_table(table: &ScoreTable, method: SelectionStrategy, i: usize, j: usize) -> Self {
        let e = &table.entries;
        let (s1, si, sj) = (e[0].score, e[i].score, e[j].score);
        Self {
            method,
            i: i + 1,
            j: j + 1,
            l1: e[0].layout.clone(),
            li: e[i].layout.clone(),
            lj: e[j].layout.clone(),
            s1,
            si,
            sj,
            delta: pair_delta(s1, si, sj),
            cost: None,
            j_norm: None,
            delta_norm: None,
            probes: None,
        }
    }

    pub fn layouts(&self) -> [&Layout; 3] {
        [&self.l1, &self.li, &self.lj]
    }

    pub fn scores(&self) -> [f64; 3] {
        [self.s1, self.si, self.sj]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection serialization")
    }
}

fn pair_delta(s1: f64, si: f64, sj: f64) -> f64 {
    ((s1 - si).abs() - (si - sj).abs()).abs()
}

fn check_size(table: &ScoreTable) -> Result<()> {
    if table.len() < 3 {
        return Err(Error::InsufficientLayouts(table.len()));
    }
    Ok(())
}

/// Exhaustive search over all pairs `0 < i < j < m` minimizing
/// `a·(1 − j/(m−1)) + (1 − a)·δ_norm`, with `δ` min-max normalized over all
/// pairs and `j` the 0-based position. Ties go to the smallest `(i, j)`.
pub fn select_exhaustive(table: &ScoreTable, a: f64) -> Result<SelectionTriple> {
    check_size(table)?;
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidInput(format!(
            "trade-off a must be in [0,1], got {a}"
        )));
    }
    let s = table.scores();
    let m = s.len();
    let (lo, hi) = (1..m - 1)
        .into_par_iter()
        .map(|i| {
            (i + 1..m).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
                let d = pair_delta(s[0], s[i], s[j]);
                (lo.min(d), hi.max(d))
            })
        })
        .reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |x, y| (x.0.min(y.0), x.1.max(y.1)),
        );
    let span = hi - lo;
    let cost = |i: usize, j: usize| {
        let jn = j as f64 / (m - 1) as f64;
        let dn = if span > 0.0 {
            (pair_delta(s[0], s[i], s[j]) - lo) / span
        } else {
            0.0
        };
        (a * (1.0 - jn) + (1.0 - a) * dn, jn, dn)
    };
    let per_row: Vec<(f64, usize, usize)> = (1..m - 1)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, i, i + 1);
            for j in i + 1..m {
                let c = cost(i, j).0;
                if c < best.0 {
                    best = (c, i, j);
                }
            }
            best
        })
        .collect();
    let (_, i, j) = per_row
        .into_iter()
        .reduce(|x, y| if y.0 < x.0 { y } else { x })
        .expect("m >= 3");
    let (c, jn, dn) = cost(i, j);
    let mut triple = SelectionTriple::from_table(table, SelectionStrategy::Exhaustive, i, j);
    triple.cost = Some(c);
    triple.j_norm = Some(jn);
    triple.delta_norm = Some(dn);
    Ok(triple)
}

/// Binary search for the interior position whose score is closest to the
/// midpoint of the first and last scores. Stops early once the defect is
/// at most `eps`.
pub fn select_binary(table: &ScoreTable, eps: f64) -> Result<SelectionTriple> {
    check_size(table)?;
    if !(eps >= 0.0) {
        return Err(Error::InvalidInput(format!("eps must be >= 0, got {eps}")));
    }
    let e = &table.entries;
    let last = e.len() - 1;
    let (s1, sl) = (e[0].score, e[last].score);
    let (mut low, mut high) = (1, last - 1);
    let mut best = (f64::INFINITY, 1);
    let mut probes = 0;
    while low <= high {
        let mid = low + (high - low) / 2;
        probes += 1;
        let d1 = e[mid].score - s1;
        let d2 = sl - e[mid].score;
        let diff = (d1 - d2).abs();
        if diff < best.0 {
            best = (diff, mid);
        }
        if diff <= eps {
            break;
        }
        if d2 > d1 {
            low = mid + 1;
        } else {
            high = mid - 1;
        }
    }
    let mut triple = SelectionTriple::from_table(table, SelectionStrategy::Binary, best.1, last);
    triple.probes = Some(probes);
    Ok(triple)
}

/// Midpoint evaluations recorded by [`select_binary`]; zero for other
/// strategies.
pub fn count_probe_evaluations(triple: &SelectionTriple) -> usize {
    triple.probes.unwrap_or(0)
}

/// Run the named strategy; `a` applies to exhaustive, `eps` to binary.
pub fn select(table: &ScoreTable, strategy: SelectionStrategy, a: f64, eps: f64) -> Result<SelectionTriple> {
    match strategy {
        SelectionStrategy::Exhaustive => select_exhaustive(table, a),
        SelectionStrategy::Binary => select_binary(table, eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{ScoreMethod, ScoredLayout};

    fn table(scores: &[f64]) -> ScoreTable {
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

    #[test]
    fn exhaustive_examples() {
        let t = table(&[0.1, 0.2, 0.3, 0.9]);
        let r = select_exhaustive(&t, 0.0).unwrap();
        assert_eq!((r.si, r.sj), (0.2, 0.3));
        assert!(r.delta < 1e-12);
        let r = select_exhaustive(&t, 1.0).unwrap();
        assert_eq!((r.i, r.j), (2, 4));
        assert_eq!(r.cost, Some(0.0));
        assert!(select_exhaustive(&t, 1.5).is_err());
        assert!(select_exhaustive(&table(&[0.1, 0.2]), 0.1).is_err());
    }

    #[test]
    fn binary_examples() {
        let ap: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let r = select_binary(&table(&ap), 0.0).unwrap();
        assert_eq!(r.i, 6);
        assert_eq!(r.j, 11);
        assert!(r.delta < 1e-12);
        assert!(count_probe_evaluations(&r) <= 5);
        assert!(select_binary(&table(&[0.1, 0.2]), 0.0).is_err());
        let r = select_binary(&table(&[0.1, 0.2, 0.3]), 0.0).unwrap();
        assert_eq!(r.i, 2);
        assert!(count_probe_evaluations(&r) <= 3);
    }

    #[test]
    fn triple_serializes_one_based() {
        let r = select_binary(&table(&[0.1, 0.2, 0.3]), 0.0).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["i"], 2);
        assert_eq!(v["method"], "binary");
        assert!(v.get("cost").is_none());
    }
}
