//! Grids of mitigation runs with one report per cell and a summary CSV.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{cliffordize, CircuitFamily};
use crate::device::{generate_device, load_device, DeviceGenSpec, DeviceModel};
use crate::error::{Error, Result};
use crate::mitigation::{
    best_layout, run_ffzne, run_folded_zne, save_report, FfzneConfig, FitModel, MitigationReport, ZneConfig,
};
use crate::rng;
use crate::scoring::ScoreMethod;
use crate::selection::{SelectionStrategy, DEFAULT_A};
use crate::sim::ObservableKind;

/// Selection strategy, optionally preceded by overlap truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignStrategy {
    Exhaustive,
    Binary,
    TruncatedExhaustive,
    TruncatedBinary,
}

impl CampaignStrategy {
    pub const ALL: [CampaignStrategy; 4] = [
        CampaignStrategy::Exhaustive,
        CampaignStrategy::Binary,
        CampaignStrategy::TruncatedExhaustive,
        CampaignStrategy::TruncatedBinary,
    ];

    pub fn selection(self) -> SelectionStrategy {
        match self {
            CampaignStrategy::Exhaustive | CampaignStrategy::TruncatedExhaustive => {
                SelectionStrategy::Exhaustive
            }
            CampaignStrategy::Binary | CampaignStrategy::TruncatedBinary => SelectionStrategy::Binary,
        }
    }

    pub fn truncated(self) -> bool {
        matches!(
            self,
            CampaignStrategy::TruncatedExhaustive | CampaignStrategy::TruncatedBinary
        )
    }
}

impl fmt::Display for CampaignStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CampaignStrategy::Exhaustive => "exhaustive",
            CampaignStrategy::Binary => "binary",
            CampaignStrategy::TruncatedExhaustive => "truncated-exhaustive",
            CampaignStrategy::TruncatedBinary => "truncated-binary",
        })
    }
}

impl FromStr for CampaignStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CampaignStrategy::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown campaign strategy `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviceSource {
    Path(PathBuf),
    Generate(DeviceGenSpec),
}

impl DeviceSource {
    pub fn load(&self) -> Result<DeviceModel> {
        match self {
            DeviceSource::Path(p) => load_device(p),
            DeviceSource::Generate(spec) => generate_device(spec),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub lambdas: Vec<f64>,
    pub extrapolator: FitModel,
}

fn default_true() -> bool {
    true
}

fn default_a() -> f64 {
    DEFAULT_A
}

fn default_eta() -> usize {
    10
}

fn default_strategies() -> Vec<CampaignStrategy> {
    vec![CampaignStrategy::Exhaustive]
}

fn default_scores() -> Vec<ScoreMethod> {
    vec![ScoreMethod::FidelityProduct]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub device: DeviceSource,
    pub family: CircuitFamily,
    pub n: Vec<usize>,
    pub reps: Vec<usize>,
    /// Snap rotations to Clifford angles before running.
    #[serde(default = "default_true")]
    pub cliffordize: bool,
    #[serde(default = "default_scores")]
    pub score_methods: Vec<ScoreMethod>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<CampaignStrategy>,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_eta")]
    pub eta: usize,
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub cap: Option<usize>,
    #[serde(default)]
    pub observable: Option<ObservableKind>,
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub score_shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub baseline: Option<BaselineSpec>,
    /// Record wall-times; makes the outputs run-dependent.
    #[serde(default)]
    pub timings: bool,
    pub output: PathBuf,
}

impl CampaignSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("n", self.n.is_empty()),
            ("reps", self.reps.is_empty()),
            ("score_methods", self.score_methods.is_empty()),
            ("strategies", self.strategies.is_empty()),
        ] {
            if empty {
                return Err(Error::Validation(format!("campaign grid `{name}` is empty")));
            }
        }
        if let DeviceSource::Path(p) = &self.device {
            if !p.exists() {
                return Err(Error::Validation(format!(
                    "device file {} does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }
}

/// One line of the summary CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub family: String,
    pub n: usize,
    pub reps: usize,
    pub score_method: String,
    pub strategy: String,
    pub status: String,
    pub error_code: String,
    pub layouts: Option<usize>,
    pub filtered: Option<usize>,
    pub delta: Option<f64>,
    pub probes: Option<usize>,
    pub estimate: Option<f64>,
    pub ideal: Option<f64>,
    pub deviation_pct: Option<f64>,
    pub unmitigated_deviation_pct: Option<f64>,
    pub executions: Option<usize>,
    pub time_s: Option<f64>,
    pub report: String,
}

#[derive(Clone, Debug)]
pub struct CampaignOutcome {
    pub rows: Vec<SummaryRow>,
    pub summary_path: PathBuf,
    pub reports: Vec<Option<MitigationReport>>,
}

#[derive(Clone, Copy, Debug)]
enum CellKind {
    Ffzne(ScoreMethod, CampaignStrategy),
    Baseline,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    n: usize,
    reps: usize,
    kind: CellKind,
}

impl Cell {
    fn labels(&self) -> (String, String) {
        match self.kind {
            CellKind::Ffzne(m, s) => (m.to_string(), s.to_string()),
            CellKind::Baseline => (String::new(), "zne".into()),
        }
    }

    fn file_name(&self, family: CircuitFamily) -> String {
        let (m, s) = self.labels();
        let m = if m.is_empty() { "none".into() } else { m };
        format!("{family}_n{}_r{}_{m}_{s}.json", self.n, self.reps)
    }
}

/// Run every grid cell in parallel and write `cells/*.json` plus
/// `summary.csv` into the output directory. A failing cell is recorded with
/// its error code and does not stop the campaign.
pub fn run_campaign(spec: &CampaignSpec) -> Result<CampaignOutcome> {
    spec.validate()?;
    let device = spec.device.load()?;
    let cells_dir = spec.output.join("cells");
    fs::create_dir_all(&cells_dir)?;

    let mut cells = Vec::new();
    for &n in &spec.n {
        for &reps in &spec.reps {
            for &m in &spec.score_methods {
                for &s in &spec.strategies {
                    cells.push(Cell {
                        n,
                        reps,
                        kind: CellKind::Ffzne(m, s),
                    });
                }
            }
            if spec.baseline.is_some() {
                cells.push(Cell {
                    n,
                    reps,
                    kind: CellKind::Baseline,
                });
            }
        }
    }

    let results: Vec<(Result<MitigationReport>, f64)> = cells
        .par_iter()
        .map(|cell| {
            let start = Instant::now();
            let out = run_cell(spec, &device, cell);
            (out, start.elapsed().as_secs_f64())
        })
        .collect();

    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (cell, (result, secs)) in cells.iter().zip(results) {
        let (score_method, strategy) = cell.labels();
        let mut row = SummaryRow {
            family: spec.family.to_string(),
            n: cell.n,
            reps: cell.reps,
            score_method,
            strategy,
            status: "ok".into(),
            error_code: String::new(),
            layouts: None,
            filtered: None,
            delta: None,
            probes: None,
            estimate: None,
            ideal: None,
            deviation_pct: None,
            unmitigated_deviation_pct: None,
            executions: None,
            time_s: spec.timings.then_some(secs),
            report: String::new(),
        };
        match result {
            Ok(report) => {
                let name = cell.file_name(spec.family);
                save_report(&report, cells_dir.join(&name))?;
                row.report = format!("cells/{name}");
                row.layouts = report.layouts_enumerated;
                row.filtered = report.layouts_filtered;
                row.delta = report.triple.as_ref().map(|t| t.delta);
                row.probes = report.triple.as_ref().and_then(|t| t.probes);
                row.estimate = Some(report.estimate);
                row.ideal = report.ideal;
                row.deviation_pct = report.deviation_pct;
                row.unmitigated_deviation_pct = report.unmitigated_deviation_pct;
                row.executions = Some(report.executions);
                reports.push(Some(report));
            }
            Err(e) => {
                row.status = "error".into();
                row.error_code = e.code().into();
                reports.push(None);
            }
        }
        rows.push(row);
    }

    let summary_path = spec.output.join("summary.csv");
    write_summary(&rows, &summary_path)?;
    Ok(CampaignOutcome {
        rows,
        summary_path,
        reports,
    })
}

fn write_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn run_cell(spec: &CampaignSpec, device: &DeviceModel, cell: &Cell) -> Result<MitigationReport> {
    let seed = rng::derive_seed(spec.seed, &[cell.n as u64, cell.reps as u64]);
    let mut circuit = spec.family.generate(cell.n, cell.reps, seed)?;
    if spec.cliffordize {
        circuit = cliffordize(&circuit);
    }
    let observable = spec.observable.unwrap_or(ObservableKind::Zw1);
    let mut report = match cell.kind {
        CellKind::Ffzne(method, strategy) => {
            let mut cfg = FfzneConfig::new(method, strategy.selection());
            cfg.a = spec.a;
            cfg.eps = spec.eps;
            cfg.eta = strategy.truncated().then_some(spec.eta);
            cfg.cap = spec.cap;
            cfg.observable = observable;
            cfg.shots = spec.shots;
            cfg.score_shots = spec.score_shots;
            cfg.seed = seed;
            cfg.timings = spec.timings;
            run_ffzne(&circuit, device, &cfg)?
        }
        CellKind::Baseline => {
            let b = spec
                .baseline
                .as_ref()
                .expect("baseline cell implies a baseline spec");
            let layout = best_layout(&circuit, device, ScoreMethod::FidelityProduct, 0, seed)?;
            let mut cfg = ZneConfig::new(b.lambdas.clone(), b.extrapolator);
            cfg.observable = observable;
            cfg.shots = spec.shots;
            cfg.seed = seed;
            cfg.timings = spec.timings;
            run_folded_zne(&circuit, device, &layout, &cfg)?
        }
    };
    report.family = Some(spec.family.to_string());
    report.reps = Some(cell.reps);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Topology;

    fn spec(dir: &Path) -> CampaignSpec {
        CampaignSpec {
            device: DeviceSource::Generate(DeviceGenSpec::new(Topology::HeavyHex { rows: 2, cols: 2 })),
            family: CircuitFamily::Su2,
            n: vec![4, 5],
            reps: vec![1],
            cliffordize: true,
            score_methods: vec![ScoreMethod::FidelityProduct],
            strategies: CampaignStrategy::ALL.to_vec(),
            a: DEFAULT_A,
            eta: 3,
            eps: 0.0,
            cap: None,
            observable: None,
            shots: 0,
            score_shots: 0,
            seed: 9,
            baseline: Some(BaselineSpec {
                lambdas: vec![1.0, 3.0, 5.0],
                extrapolator: FitModel::Linear,
            }),
            timings: false,
            output: dir.to_path_buf(),
        }
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in CampaignStrategy::ALL {
            assert_eq!(s.to_string().parse::<CampaignStrategy>().unwrap(), s);
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let dir = std::env::temp_dir();
        let mut s = spec(&dir);
        s.n.clear();
        assert!(matches!(run_campaign(&s), Err(Error::Validation(_))));
    }

    #[test]
    fn campaign_is_deterministic() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let out = run_campaign(&spec(a.path())).unwrap();
        run_campaign(&spec(b.path())).unwrap();
        assert_eq!(out.rows.len(), 10);
        let read = |d: &Path| fs::read(d.join("summary.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
        for row in out
            .rows
            .iter()
            .filter(|r| r.strategy != "zne" && r.status == "ok")
        {
            assert_eq!(row.executions, Some(3));
        }
    }
}
