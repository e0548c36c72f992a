//! Zero-noise extrapolators.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `|C|` below which an exponential fit degenerates to a line.
pub const EXP_DEGENERATE_RATE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Linear,
    Exponential,
    Richardson2,
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Linear => "linear",
            FitModel::Exponential => "exponential",
            FitModel::Richardson2 => "richardson2",
        })
    }
}

impl FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FitModel::Linear),
            "exp" | "exponential" => Ok(FitModel::Exponential),
            "richardson" | "richardson2" => Ok(FitModel::Richardson2),
            other => Err(Error::InvalidInput(format!(
                "unknown extrapolator `{other}` (expected linear or exp)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum XAxis {
    LayoutScore,
    NoiseFactor,
}

/// A fitted extrapolation and its value at `x = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub model: FitModel,
    /// `[intercept, slope]` for linear, `[A, B, C]` for exponential.
    pub params: Vec<f64>,
    pub zero_noise_estimate: f64,
    /// `y − fit(x)` per input point, in input order.
    pub residuals: Vec<f64>,
    pub x_axis: XAxis,
    /// Set when an exponential fit degenerated and a line was used instead.
    #[serde(default)]
    pub linear_fallback: bool,
}

impl Extrapolation {
    pub fn with_axis(mut self, axis: XAxis) -> Self {
        self.x_axis = axis;
        self
    }

    /// The fitted curve at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.model {
            FitModel::Linear | FitModel::Richardson2 => self.params[0] + self.params[1] * x,
            FitModel::Exponential if self.linear_fallback => self.params[0] + self.params[1] * x,
            FitModel::Exponential => self.params[0] + self.params[1] * (self.params[2] * x).exp(),
        }
    }
}

fn check_points(points: &[(f64, f64)], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(Error::FitFailed(format!(
            "need at least {min} points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::FitFailed(format!("non-finite point {p:?}")));
    }
    Ok(())
}

fn finish(model: FitModel, params: Vec<f64>, points: &[(f64, f64)], fallback: bool) -> Extrapolation {
    let mut fit = Extrapolation {
        model,
        params,
        zero_noise_estimate: 0.0,
        residuals: Vec::new(),
        x_axis: XAxis::LayoutScore,
        linear_fallback: fallback,
    };
    fit.zero_noise_estimate = fit.eval(0.0);
    fit.residuals = points.iter().map(|&(x, y)| y - fit.eval(x)).collect();
    fit
}

/// `δ/(δ−1)·e₁ − 1/(δ−1)·e₂`: the line through `(x, e₁)` and `(δx, e₂)`
/// evaluated at 0.
pub fn richardson_two_point(e1: f64, e2: f64, delta: f64) -> Result<f64> {
    if !(delta > 1.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "noise ratio δ must exceed 1, got {delta}"
        )));
    }
    Ok(delta / (delta - 1.0) * e1 - e2 / (delta - 1.0))
}

/// Ordinary least squares `y = α + βx`.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<Extrapolation> {
    let weights = vec![1.0; points.len()];
    fit_linear_weighted(points, &weights)
}

/// Weighted least squares `y = α + βx` with weights `w` (typically
/// `1/stderr²`).
pub fn fit_linear_weighted(points: &[(f64, f64)], weights: &[f64]) -> Result<Extrapolation> {
    check_points(points, 2)?;
    if weights.len() != points.len() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::FitFailed(
            "weights must be positive and one per point".into(),
        ));
    }
    let sw: f64 = weights.iter().sum();
    let xm = points.iter().zip(weights).map(|((x, _), w)| w * x).sum::<f64>() / sw;
    let ym = points.iter().zip(weights).map(|((_, y), w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = points
        .iter()
        .zip(weights)
        .map(|((x, _), w)| w * (x - xm).powi(2))
        .sum();
    let sxy: f64 = points
        .iter()
        .zip(weights)
        .map(|((x, y), w)| w * (x - xm) * (y - ym))
        .sum();
    let spread = points.iter().any(|(x, _)| *x != points[0].0);
    if !spread || sxx == 0.0 {
        return Err(Error::FitFailed("degenerate abscissae: all x are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    Ok(finish(FitModel::Linear, vec![intercept, slope], points, false))
}

/// Least squares `y = A + B·e^{Cx}`.
///
/// Three equally spaced points are solved in closed form. Otherwise `C` is
/// found by a one-dimensional search of the residual (for fixed `C`, `A`
/// and `B` are linear) seeded from the first, middle and last points.
/// Constant data returns the constant; `|C| < 1e-9` falls back to a line
/// and sets [`Extrapolation::linear_fallback`].
pub fn fit_exponential(points: &[(f64, f64)]) -> Result<Extrapolation> {
    check_points(points, 3)?;
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::FitFailed("exponential fit needs distinct x".into()));
    }
    if sorted.iter().all(|p| p.1 == sorted[0].1) {
        return Ok(finish(
            FitModel::Exponential,
            vec![sorted[0].1, 0.0, 0.0],
            points,
            false,
        ));
    }
    let (p0, p1, p2) = (sorted[0], sorted[sorted.len() / 2], sorted[sorted.len() - 1]);
    let ratio = (p2.1 - p1.1) / (p1.1 - p0.1);
    let spacing = (p2.0 - p0.0) / 2.0;
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::FitFailed(format!(
            "exponential fit failed: successive differences change sign (ratio {ratio})"
        )));
    }
    let equally_spaced =
        sorted.len() == 3 && ((p1.0 - p0.0) - (p2.0 - p1.0)).abs() <= 1e-12 * spacing.max(1.0);
    let c0 = ratio.ln() / spacing;
    let c = if equally_spaced {
        c0
    } else {
        search_rate(&sorted, c0)?
    };
    if c.abs() < EXP_DEGENERATE_RATE {
        let line = fit_linear(points)?;
        return Ok(finish(FitModel::Exponential, line.params, points, true));
    }
    let (a, b) = if equally_spaced {
        let e0 = (c * p0.0).exp();
        let b = (p1.1 - p0.1) / (e0 * (ratio - 1.0));
        (p0.1 - b * e0, b)
    } else {
        linear_part(&sorted, c)
            .ok_or_else(|| Error::FitFailed("exponential fit failed: singular basis".into()))?
    };
    let fit = finish(FitModel::Exponential, vec![a, b, c], points, false);
    if !fit.zero_noise_estimate.is_finite() || fit.params.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed(
            "exponential fit failed: parameters overflow".into(),
        ));
    }
    Ok(fit)
}

/// Best `(A, B)` for fixed `C`.
fn linear_part(points: &[(f64, f64)], c: f64) -> Option<(f64, f64)> {
    let basis: Vec<(f64, f64)> = points.iter().map(|&(x, y)| ((c * x).exp(), y)).collect();
    let line = fit_linear(&basis).ok()?;
    Some((line.params[0], line.params[1]))
}

fn rss(points: &[(f64, f64)], c: f64) -> f64 {
    match linear_part(points, c) {
        Some((a, b)) => points
            .iter()
            .map(|&(x, y)| (y - a - b * (c * x).exp()).powi(2))
            .sum(),
        None => f64::INFINITY,
    }
}

fn search_rate(points: &[(f64, f64)], seed: f64) -> Result<f64> {
    let range = points[points.len() - 1].0 - points[0].0;
    let half_width = (4.0 * seed.abs()).max(4.0 / range);
    let grid = 400;
    let at = |k: usize| seed - half_width + 2.0 * half_width * k as f64 / grid as f64;
    let best = (0..=grid)
        .min_by(|&i, &j| rss(points, at(i)).total_cmp(&rss(points, at(j))))
        .expect("nonempty grid");
    if best == 0 || best == grid {
        return Err(Error::FitFailed(
            "exponential fit failed: no interior minimum of the residual".into(),
        ));
    }
    // Golden-section refinement inside the bracketing grid cells.
    let (mut lo, mut hi) = (at(best - 1), at(best + 1));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if rss(points, m1) <= rss(points, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    Ok((lo + hi) / 2.0)
}
