//! Layout-based zero-noise extrapolation and the folded-circuit baseline.
//!
//! [`run_ffzne`] executes one circuit on three layouts chosen from the score
//! table and extrapolates the expectation values linearly to score 0.
//! [`run_folded_zne`] executes folded copies of the circuit on one layout
//! and extrapolates in the noise factor.

mod fit;

use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{fold, Circuit};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::layout::{enumerate_circuit_layouts, truncate_by_overlap, Layout};
use crate::rng;
use crate::scoring::{filter_scores, score_layouts, ScoreMethod, ScoreTable};
use crate::selection::{select, SelectionStrategy, SelectionTriple, DEFAULT_A};
use crate::sim::{expval, ideal_expval, ExpvalEstimate, NoiseModel, ObservableKind, PauliObservable};

pub use fit::{
    fit_exponential, fit_linear, fit_linear_weighted, richardson_two_point, Extrapolation, FitModel, XAxis,
    EXP_DEGENERATE_RATE,
};

const SCORE_STREAM: u64 = 0x5c0e;
const EXEC_STREAM: u64 = 0xe8ec;

/// Noise factor sets commonly used for folded ZNE; 28 executions in total.
pub const LITERATURE_NOISE_FACTORS: [&[f64]; 8] = [
    &[1.0, 3.0, 5.0],
    &[1.0, 1.1, 1.2],
    &[1.0, 2.0, 3.0],
    &[1.0, 1.5, 2.0, 2.5, 3.0],
    &[1.0, 3.0, 5.0, 7.0],
    &[1.2, 1.4, 1.6, 1.8, 2.0],
    &[1.0, 3.0],
    &[1.0, 1.2, 1.6],
];

#[derive(Clone, Debug, PartialEq)]
pub enum BudgetMode {
    Ffzne,
    /// One baseline run per set in [`LITERATURE_NOISE_FACTORS`].
    ExhaustiveBaseline,
    Baseline(Vec<f64>),
}

/// Circuit executions needed by a mitigation mode.
pub fn execution_budget(mode: &BudgetMode) -> usize {
    match mode {
        BudgetMode::Ffzne => 3,
        BudgetMode::ExhaustiveBaseline => LITERATURE_NOISE_FACTORS.iter().map(|s| s.len()).sum(),
        BudgetMode::Baseline(lambdas) => lambdas.len(),
    }
}

/// Noise applied when executing the selected layouts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PipelineNoise {
    /// Depolarizing after every gate with the device's error rates.
    PerGate,
    /// Global depolarizing of strength `gain · score` on each layout.
    GlobalProportional { gain: f64 },
}

impl PipelineNoise {
    fn model(&self, score: f64) -> Result<NoiseModel> {
        let noise = match *self {
            PipelineNoise::PerGate => NoiseModel::PerGateDepolarizing,
            PipelineNoise::GlobalProportional { gain } => NoiseModel::GlobalDepolarizing { p: gain * score },
        };
        noise.validate()?;
        Ok(noise)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfzneConfig {
    pub score_method: ScoreMethod,
    pub strategy: SelectionStrategy,
    /// Trade-off of the exhaustive strategy.
    pub a: f64,
    /// Early-exit tolerance of the binary strategy.
    pub eps: f64,
    /// Overlap threshold for layout truncation; `None` keeps every layout.
    pub eta: Option<usize>,
    /// Cap on enumerated layouts.
    pub cap: Option<usize>,
    pub observable: ObservableKind,
    /// Shots per layout execution; 0 is exact.
    pub shots: u64,
    /// Shots per QIC score; 0 is exact.
    pub score_shots: u64,
    pub seed: u64,
    pub noise: PipelineNoise,
    /// Weight the fit by `1/stderr²` (sampled mode only).
    pub weighted: bool,
    pub timings: bool,
}

impl FfzneConfig {
    pub fn new(score_method: ScoreMethod, strategy: SelectionStrategy) -> Self {
        Self {
            score_method,
            strategy,
            a: DEFAULT_A,
            eps: 0.0,
            eta: None,
            cap: None,
            observable: ObservableKind::Zw1,
            shots: 0,
            score_shots: 0,
            seed: 0,
            noise: PipelineNoise::PerGate,
            weighted: false,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    pub lambdas: Vec<f64>,
    pub extrapolator: FitModel,
    pub observable: ObservableKind,
    pub shots: u64,
    pub seed: u64,
    pub timings: bool,
}

impl ZneConfig {
    pub fn new(lambdas: Vec<f64>, extrapolator: FitModel) -> Self {
        Self {
            lambdas,
            extrapolator,
            observable: ObservableKind::Zw1,
            shots: 0,
            seed: 0,
            timings: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MitigationMethod {
    Ffzne,
    Zne,
}

impl fmt::Display for MitigationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MitigationMethod::Ffzne => "ffzne",
            MitigationMethod::Zne => "zne",
        })
    }
}

/// One execution: abscissa (score or noise factor) and its estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub x: f64,
    pub expval: f64,
    pub stderr: f64,
}

/// Wall-clock seconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub enumerate: f64,
    pub score: f64,
    pub filter: f64,
    pub select: f64,
    pub execute: f64,
    pub fit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigationReport {
    pub method: MitigationMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    pub num_qubits: usize,
    pub circuit_hash: String,
    pub device: String,
    pub observable: ObservableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score_method: Option<ScoreMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<SelectionTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    /// Layout of the baseline executions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layouts_enumerated: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layouts_filtered: Option<usize>,
    pub points: Vec<DataPoint>,
    pub extrapolation: Extrapolation,
    pub estimate: f64,
    pub ideal: Option<f64>,
    pub deviation_pct: Option<f64>,
    /// Expectation value of the first execution: the best layout, or the
    /// smallest noise factor.
    pub unmitigated: f64,
    pub unmitigated_deviation_pct: Option<f64>,
    pub executions: usize,
    pub shots: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
}

impl MitigationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn load_report(path: impl AsRef<Path>) -> Result<MitigationReport> {
    MitigationReport::from_json(&fs::read_to_string(path)?)
}

pub fn save_report(report: &MitigationReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report.to_json())?;
    Ok(())
}

/// `100·|estimate − ideal|/|ideal|`, or `None` for a zero ideal.
pub fn deviation_pct(estimate: f64, ideal: f64) -> Option<f64> {
    (ideal != 0.0).then(|| 100.0 * (estimate - ideal).abs() / ideal.abs())
}

struct Clock {
    enabled: bool,
    start: Instant,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            start: Instant::now(),
        }
    }

    fn lap(&mut self) -> f64 {
        let now = Instant::now();
        let dt = (now - self.start).as_secs_f64();
        self.start = now;
        if self.enabled {
            dt
        } else {
            0.0
        }
    }
}

fn points_of(xs: &[f64], estimates: &[ExpvalEstimate]) -> Vec<DataPoint> {
    xs.iter()
        .zip(estimates)
        .map(|(&x, e)| DataPoint {
            x,
            expval: e.mean,
            stderr: e.stderr,
        })
        .collect()
}

/// Score table of every layout of `circuit` on `device`, after optional
/// truncation. Also returns the number of layouts enumerated.
pub fn score_circuit_layouts(
    circuit: &Circuit,
    device: &DeviceModel,
    method: ScoreMethod,
    eta: Option<usize>,
    cap: Option<usize>,
    shots: u64,
    seed: u64,
) -> Result<ScoreTable> {
    let mut set = enumerate_circuit_layouts(circuit, device, cap)?;
    if let Some(eta) = eta {
        set = truncate_by_overlap(&set, eta)?;
    }
    score_layouts(circuit, &set, device, method, shots, seed)
}

/// Lowest-scoring layout of `circuit` on `device`.
pub fn best_layout(
    circuit: &Circuit,
    device: &DeviceModel,
    method: ScoreMethod,
    shots: u64,
    seed: u64,
) -> Result<Layout> {
    let table = score_circuit_layouts(circuit, device, method, None, None, shots, seed)?;
    table
        .entries
        .first()
        .map(|e| e.layout.clone())
        .ok_or(Error::InsufficientLayouts(0))
}

/// Enumerate, score, filter and select three layouts, execute the circuit on
/// each and extrapolate the expectation values linearly to score 0.
pub fn run_ffzne(circuit: &Circuit, device: &DeviceModel, config: &FfzneConfig) -> Result<MitigationReport> {
    let observable = config.observable.build(circuit.num_qubits())?;
    if config.weighted && config.shots == 0 {
        return Err(Error::InvalidInput(
            "weighted fits need sampled execution (shots > 0)".into(),
        ));
    }
    let mut clock = Clock::new(config.timings);
    let mut timings = StageTimings::default();

    let mut set = enumerate_circuit_layouts(circuit, device, config.cap)?;
    let enumerated = set.len();
    if let Some(eta) = config.eta {
        set = truncate_by_overlap(&set, eta)?;
    }
    timings.enumerate = clock.lap();

    let score_seed = rng::derive_seed(config.seed, &[SCORE_STREAM]);
    let table = score_layouts(
        circuit,
        &set,
        device,
        config.score_method,
        config.score_shots,
        score_seed,
    )?;
    timings.score = clock.lap();

    let filtered = filter_scores(&table)?;
    timings.filter = clock.lap();

    let triple = select(&filtered, config.strategy, config.a, config.eps)?;
    timings.select = clock.lap();

    let scores = triple.scores();
    let estimates = triple
        .layouts()
        .par_iter()
        .zip(scores.par_iter())
        .enumerate()
        .map(|(k, (layout, &score))| {
            let noise = config.noise.model(score)?;
            let seed = rng::derive_seed(config.seed, &[EXEC_STREAM, k as u64]);
            expval(circuit, layout, device, &noise, &observable, config.shots, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    timings.execute = clock.lap();

    let points = points_of(&scores, &estimates);
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.expval)).collect();
    let extrapolation = if config.weighted {
        let w: Vec<f64> = points
            .iter()
            .map(|p| 1.0 / p.stderr.max(f64::MIN_POSITIVE).powi(2))
            .collect();
        fit_linear_weighted(&xy, &w)?
    } else {
        fit_linear(&xy)?
    };
    timings.fit = clock.lap();

    let ideal = ideal_expval(circuit, &observable)?;
    Ok(assemble(Assembly {
        method: MitigationMethod::Ffzne,
        circuit,
        device,
        observable: config.observable,
        points,
        extrapolation,
        ideal,
        shots: config.shots,
        seed: config.seed,
        timings: config.timings.then_some(timings),
    })
    .with_ffzne(config.score_method, triple, enumerated, filtered.len()))
}

struct Assembly<'a> {
    method: MitigationMethod,
    circuit: &'a Circuit,
    device: &'a DeviceModel,
    observable: ObservableKind,
    points: Vec<DataPoint>,
    extrapolation: Extrapolation,
    ideal: f64,
    shots: u64,
    seed: u64,
    timings: Option<StageTimings>,
}

fn assemble(a: Assembly<'_>) -> MitigationReport {
    let estimate = a.extrapolation.zero_noise_estimate;
    let unmitigated = a.points[0].expval;
    MitigationReport {
        method: a.method,
        family: None,
        reps: None,
        num_qubits: a.circuit.num_qubits(),
        circuit_hash: a.circuit.content_hash(),
        device: a.device.name().to_string(),
        observable: a.observable,
        score_method: None,
        triple: None,
        lambdas: None,
        layout: None,
        layouts_enumerated: None,
        layouts_filtered: None,
        executions: a.points.len(),
        points: a.points,
        extrapolation: a.extrapolation,
        estimate,
        ideal: Some(a.ideal),
        deviation_pct: deviation_pct(estimate, a.ideal),
        unmitigated,
        unmitigated_deviation_pct: deviation_pct(unmitigated, a.ideal),
        shots: a.shots,
        seed: a.seed,
        timings: a.timings,
    }
}

impl MitigationReport {
    fn with_ffzne(
        mut self,
        method: ScoreMethod,
        triple: SelectionTriple,
        enumerated: usize,
        filtered: usize,
    ) -> Self {
        self.score_method = Some(method);
        self.triple = Some(triple);
        self.layouts_enumerated = Some(enumerated);
        self.layouts_filtered = Some(filtered);
        self
    }
}

fn check_lambdas(lambdas: &[f64], model: FitModel) -> Result<()> {
    let need = match model {
        FitModel::Linear => 2,
        FitModel::Exponential => 3,
        FitModel::Richardson2 => 2,
    };
    if lambdas.len() < need {
        return Err(Error::InvalidInput(format!(
            "{model} extrapolation needs at least {need} noise factors, got {}",
            lambdas.len()
        )));
    }
    if model == FitModel::Richardson2 && lambdas.len() != 2 {
        return Err(Error::InvalidInput(
            "richardson2 uses exactly 2 noise factors".into(),
        ));
    }
    if !(lambdas[0] >= 1.0)
        || lambdas.windows(2).any(|w| !(w[0] < w[1]))
        || lambdas.iter().any(|l| !l.is_finite())
    {
        return Err(Error::InvalidInput(format!(
            "noise factors must be strictly ascending from at least 1, got {lambdas:?}"
        )));
    }
    Ok(())
}

/// Fold the circuit at every noise factor, execute each on `layout` under
/// per-gate noise and extrapolate to `λ = 0`.
pub fn run_folded_zne(
    circuit: &Circuit,
    device: &DeviceModel,
    layout: &Layout,
    config: &ZneConfig,
) -> Result<MitigationReport> {
    check_lambdas(&config.lambdas, config.extrapolator)?;
    let observable: PauliObservable = config.observable.build(circuit.num_qubits())?;
    let mut clock = Clock::new(config.timings);
    let mut timings = StageTimings::default();

    let estimates = config
        .lambdas
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let folded = fold(circuit, lambda)?;
            let seed = rng::derive_seed(config.seed, &[EXEC_STREAM, k as u64]);
            expval(
                &folded,
                layout,
                device,
                &NoiseModel::PerGateDepolarizing,
                &observable,
                config.shots,
                seed,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    timings.execute = clock.lap();

    let points = points_of(&config.lambdas, &estimates);
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.expval)).collect();
    let extrapolation = match config.extrapolator {
        FitModel::Linear => fit_linear(&xy)?,
        FitModel::Exponential => fit_exponential(&xy)?,
        FitModel::Richardson2 => {
            let mut f = fit_linear(&xy)?;
            f.model = FitModel::Richardson2;
            f.zero_noise_estimate =
                richardson_two_point(xy[0].1, xy[1].1, config.lambdas[1] / config.lambdas[0])?;
            f
        }
    }
    .with_axis(XAxis::NoiseFactor);
    timings.fit = clock.lap();

    let ideal = ideal_expval(circuit, &observable)?;
    let mut report = assemble(Assembly {
        method: MitigationMethod::Zne,
        circuit,
        device,
        observable: config.observable,
        points,
        extrapolation,
        ideal,
        shots: config.shots,
        seed: config.seed,
        timings: config.timings.then_some(timings),
    });
    report.lambdas = Some(config.lambdas.clone());
    report.layout = Some(layout.clone());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{cliffordize, gen_efficient_su2, gen_mirrored_brickwork};
    use crate::device::{generate_device, DeviceGenSpec, Topology};

    fn device() -> DeviceModel {
        let mut spec = DeviceGenSpec::new(Topology::HeavyHex { rows: 2, cols: 2 });
        spec.seed = 3;
        generate_device(&spec).unwrap()
    }

    #[test]
    fn budgets() {
        assert_eq!(execution_budget(&BudgetMode::Ffzne), 3);
        assert_eq!(execution_budget(&BudgetMode::ExhaustiveBaseline), 28);
        assert_eq!(execution_budget(&BudgetMode::Baseline(vec![1.0, 3.0, 5.0])), 3);
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(deviation_pct(0.9, 1.0).map(|d| (d * 1e9).round()), Some(10.0e9));
        assert_eq!(deviation_pct(0.5, 0.0), None);
        assert!((deviation_pct(-0.95, -1.0).unwrap() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn ffzne_beats_raw_on_brickwork() {
        let dev = device();
        let c = gen_mirrored_brickwork(8, 4, 1).unwrap();
        let mut cfg = FfzneConfig::new(ScoreMethod::FidelityProduct, SelectionStrategy::Exhaustive);
        cfg.seed = 5;
        let r = run_ffzne(&c, &dev, &cfg).unwrap();
        assert_eq!(r.executions, 3);
        assert_eq!(r.ideal, Some(1.0));
        assert!((r.estimate - 1.0).abs() < (r.unmitigated - 1.0).abs(), "{r:?}");
        let back = MitigationReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn ffzne_global_proportional_is_exact() {
        let dev = device();
        let c = cliffordize(&gen_efficient_su2(6, 1, 2).unwrap());
        let mut cfg = FfzneConfig::new(ScoreMethod::FidelityProduct, SelectionStrategy::Binary);
        cfg.noise = PipelineNoise::GlobalProportional { gain: 0.8 };
        let r = run_ffzne(&c, &dev, &cfg).unwrap();
        assert!((r.estimate - r.ideal.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn zne_rejects_and_constant() {
        let dev = device();
        let c = gen_mirrored_brickwork(4, 4, 0).unwrap();
        let layout = best_layout(&c, &dev, ScoreMethod::FidelityProduct, 0, 0).unwrap();
        assert!(run_folded_zne(&c, &dev, &layout, &ZneConfig::new(vec![1.0], FitModel::Linear)).is_err());
        assert!(run_folded_zne(
            &c,
            &dev,
            &layout,
            &ZneConfig::new(vec![1.0, 3.0], FitModel::Exponential)
        )
        .is_err());
        assert!(run_folded_zne(
            &c,
            &dev,
            &layout,
            &ZneConfig::new(vec![3.0, 1.0], FitModel::Linear)
        )
        .is_err());
        let quiet = dev.noiseless();
        for model in [FitModel::Linear, FitModel::Exponential] {
            let r = run_folded_zne(&c, &quiet, &layout, &ZneConfig::new(vec![1.0, 3.0, 5.0], model)).unwrap();
            assert_eq!(r.estimate, 1.0);
            assert_eq!(r.executions, 3);
        }
    }

    #[test]
    fn zne_shallow_linear() {
        let dev = device();
        let c = gen_mirrored_brickwork(8, 4, 1).unwrap();
        let layout = best_layout(&c, &dev, ScoreMethod::FidelityProduct, 0, 0).unwrap();
        let r = run_folded_zne(
            &c,
            &dev,
            &layout,
            &ZneConfig::new(vec![1.0, 3.0, 5.0], FitModel::Linear),
        )
        .unwrap();
        assert!(r.deviation_pct.unwrap() < r.unmitigated_deviation_pct.unwrap());
        assert_eq!(r.extrapolation.x_axis, XAxis::NoiseFactor);
    }
}
