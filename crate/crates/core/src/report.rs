//! Flat CSV views of mitigation reports.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mitigation::{execution_budget, BudgetMode, MitigationMethod, MitigationReport};

/// Fitted-line samples per report in the extrapolation CSV.
pub const FIT_SAMPLES: usize = 50;

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One row per report: `family, n, reps, method, score_method, estimate,
/// ideal, deviation_pct`.
pub fn reports_csv(reports: &[MitigationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "family",
        "n",
        "reps",
        "method",
        "score_method",
        "estimate",
        "ideal",
        "deviation_pct",
    ])?;
    for r in reports {
        w.write_record([
            r.family.clone().unwrap_or_default(),
            r.num_qubits.to_string(),
            opt(r.reps),
            r.method.to_string(),
            opt(r.score_method),
            r.estimate.to_string(),
            opt(r.ideal),
            opt(r.deviation_pct),
        ])?;
    }
    finish(w)
}

fn missing(index: usize, field: &str) -> Error {
    Error::Validation(format!("report {index} is missing field `{field}`"))
}

fn check(index: usize, r: &MitigationReport) -> Result<()> {
    if r.points.is_empty() {
        return Err(missing(index, "points"));
    }
    match r.method {
        MitigationMethod::Ffzne if r.triple.is_none() => Err(missing(index, "triple")),
        MitigationMethod::Ffzne if r.score_method.is_none() => Err(missing(index, "score_method")),
        MitigationMethod::Zne if r.lambdas.is_none() => Err(missing(index, "lambdas")),
        _ => Ok(()),
    }
}

/// Data points and [`FIT_SAMPLES`] samples of the fitted curve from 0 to the
/// largest abscissa, per report.
pub fn extrapolation_csv(reports: &[MitigationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["report", "method", "kind", "x", "y", "stderr"])?;
    for (k, r) in reports.iter().enumerate() {
        check(k, r)?;
        for p in &r.points {
            w.write_record([
                k.to_string(),
                r.method.to_string(),
                "data".into(),
                p.x.to_string(),
                p.expval.to_string(),
                p.stderr.to_string(),
            ])?;
        }
        let top = r.points.iter().map(|p| p.x).fold(0.0, f64::max);
        for s in 0..FIT_SAMPLES {
            let x = top * s as f64 / (FIT_SAMPLES - 1) as f64;
            w.write_record([
                k.to_string(),
                r.method.to_string(),
                "fit".into(),
                x.to_string(),
                r.extrapolation.eval(x).to_string(),
                String::new(),
            ])?;
        }
    }
    finish(w)
}

/// Executions of layout-based mitigation against exhaustive tuning of the
/// folded baseline.
pub fn budget_csv() -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["method", "executions"])?;
    w.write_record([
        "ffzne".to_string(),
        execution_budget(&BudgetMode::Ffzne).to_string(),
    ])?;
    w.write_record([
        "exhaustive-zne".to_string(),
        execution_budget(&BudgetMode::ExhaustiveBaseline).to_string(),
    ])?;
    finish(w)
}

/// Layout score against expectation value for every layout-based report.
pub fn scatter_csv(reports: &[MitigationReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["report", "position", "layout", "score", "expval", "stderr"])?;
    for (k, r) in reports.iter().enumerate() {
        check(k, r)?;
        let Some(t) = &r.triple else { continue };
        for ((pos, layout), p) in [1, t.i, t.j].iter().zip(t.layouts()).zip(&r.points) {
            w.write_record([
                k.to_string(),
                pos.to_string(),
                layout.to_string(),
                p.x.to_string(),
                p.expval.to_string(),
                p.stderr.to_string(),
            ])?;
        }
    }
    finish(w)
}

/// Write `extrapolation.csv`, `budget.csv` and `scatter.csv` into `dir`.
pub fn emit_plot_data(reports: &[MitigationReport], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let files = [
        ("extrapolation.csv", extrapolation_csv(reports)?),
        ("budget.csv", budget_csv()?),
        ("scatter.csv", scatter_csv(reports)?),
    ];
    fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        paths.push(path);
    }
    Ok(paths)
}
