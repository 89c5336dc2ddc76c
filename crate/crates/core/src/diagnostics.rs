//! OTOC, FOTOC and OE time series, growth-rate fits and tail statistics.

use serde::Serialize;

use crate::entropy::{oe_total_raw, CoarseGraining};
use crate::error::{Error, Result};
use crate::kicked_top::heisenberg_evolve;
use crate::linalg::{ComplexMatrix, StateVector, C64};
use crate::spin_algebra::{rotation, Axis, SpinSpace};

/// Default FOTOC perturbation angle.
pub const DEFAULT_FOTOC_DELTA: f64 = 0.01;

const OTOC_REL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Oe,
    Otoc,
    Fotoc,
}

impl Quantity {
    pub fn tag(&self) -> &'static str {
        match self {
            Quantity::Oe => "oe",
            Quantity::Otoc => "otoc",
            Quantity::Fotoc => "fotoc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesMeta {
    pub quantity: Quantity,
    pub j: f64,
    pub kappa: Option<f64>,
    pub alpha: Option<f64>,
    pub ensemble_size: usize,
    pub seed: Option<u64>,
}

impl SeriesMeta {
    pub fn new(quantity: Quantity, space: SpinSpace) -> Self {
        Self { quantity, j: space.j(), kappa: None, alpha: None, ensemble_size: 1, seed: None }
    }

    /// Hilbert-space dimension `2j + 1`.
    pub fn dim(&self) -> usize {
        (2.0 * self.j).round() as usize + 1
    }

    pub fn with_dynamics(mut self, kappa: f64, alpha: f64) -> Self {
        self.kappa = Some(kappa);
        self.alpha = Some(alpha);
        self
    }
}

/// Values at steps `0..=n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub steps: Vec<usize>,
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, meta: SeriesMeta) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value {v} at step {i}")));
        }
        Ok(Self { steps: (0..values.len()).collect(), values, meta })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Least-squares line over a step window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub window: (usize, usize),
    pub residual: f64,
}

/// Ordinary least squares `y = slope x + intercept`; returns the RMS residual too.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::Window("need at least two points for a line".into()));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Window("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok((slope, intercept, (ss / n).sqrt()))
}

/// `-1/2 <psi| [A(t), A(0)]^2 |psi>` for a precomputed Heisenberg trajectory.
pub fn otoc_from_operators(psi: &StateVector, ops: &[ComplexMatrix]) -> Result<Vec<f64>> {
    let a0 = ops.first().ok_or_else(|| Error::Window("empty operator trajectory".into()))?;
    if a0.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: a0.dim(), found: psi.dim() });
    }
    let v = psi.amplitudes();
    let a_psi = a0.apply(v);
    ops.iter()
        .enumerate()
        .map(|(t, at)| {
            // X psi with X = [A(t), A]
            let x_psi: Vec<C64> = at
                .apply(&a_psi)
                .iter()
                .zip(a0.apply(&at.apply(v)))
                .map(|(p, q)| p - q)
                .collect();
            let xx_psi: Vec<C64> = at
                .apply(&a0.apply(&x_psi))
                .iter()
                .zip(a0.apply(&at.apply(&x_psi)))
                .map(|(p, q)| p - q)
                .collect();
            let expect: C64 = v.iter().zip(&xx_psi).map(|(a, b)| a.conj() * b).sum();
            let value = -0.5 * expect;
            let scale = 0.5 * x_psi.iter().map(|a| a.norm_sqr()).sum::<f64>();
            let tol = OTOC_REL_TOL * scale.max(1.0);
            if value.im.abs() > tol || value.re < -tol {
                return Err(Error::Domain(format!("OTOC at step {t} is not real non-negative: {value}")));
            }
            Ok(value.re)
        })
        .collect()
}

pub fn otoc(psi: &StateVector, a: &ComplexMatrix, u: &ComplexMatrix, n: usize) -> Result<TimeSeries> {
    if n == 0 {
        return Err(Error::Window("OTOC needs at least one step".into()));
    }
    if psi.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: psi.dim() });
    }
    let ops = heisenberg_evolve(u, a, n)?;
    let values = otoc_from_operators(psi, &ops)?;
    let space = SpinSpace::from_dim(psi.dim())?;
    TimeSeries::new(values, SeriesMeta::new(Quantity::Otoc, space))
}

/// `1 - |<psi| W_delta(t) |psi>|^2` along a precomputed trajectory `U^t psi`.
pub fn fotoc_along(trajectory: &[StateVector], w: &ComplexMatrix) -> Vec<f64> {
    trajectory
        .iter()
        .map(|psi_t| 1.0 - psi_t.expectation(w).norm_sqr())
        .collect()
}

pub fn fotoc(psi: &StateVector, delta: f64, u: &ComplexMatrix, n: usize) -> Result<TimeSeries> {
    if psi.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: psi.dim() });
    }
    let space = SpinSpace::from_dim(psi.dim())?;
    let w = rotation(space, Axis::X, delta)?;
    let traj = crate::kicked_top::evolve_state(u, psi, n)?;
    TimeSeries::new(fotoc_along(&traj, &w), SeriesMeta::new(Quantity::Fotoc, space))
}

pub fn oe_series(psi: &StateVector, cg: &CoarseGraining, u: &ComplexMatrix, n: usize) -> Result<TimeSeries> {
    if psi.dim() != cg.dim() {
        return Err(Error::DimensionMismatch { expected: cg.dim(), found: psi.dim() });
    }
    let traj = crate::kicked_top::evolve_state(u, psi, n)?;
    let values = traj.iter().map(|p| oe_total_raw(p.amplitudes(), cg)).collect();
    let space = SpinSpace::from_dim(psi.dim())?;
    TimeSeries::new(values, SeriesMeta::new(Quantity::Oe, space))
}

fn check_window(series: &TimeSeries, window: (usize, usize)) -> Result<()> {
    let (first, last) = window;
    if first >= last || last >= series.len() {
        return Err(Error::Window(format!(
            "window {first}..={last} invalid for series of length {}",
            series.len()
        )));
    }
    Ok(())
}

/// Fits `ln(max_value - value(t))` against `t` over the inclusive window.
/// The slope is negative for an exponential approach to saturation.
pub fn fit_exponential_approach(series: &TimeSeries, max_value: f64, window: (usize, usize)) -> Result<FitResult> {
    check_window(series, window)?;
    let (first, last) = window;
    let mut xs = Vec::with_capacity(last - first + 1);
    let mut ys = Vec::with_capacity(last - first + 1);
    for t in first..=last {
        let gap = max_value - series.values[t];
        if !(gap > 0.0) {
            return Err(Error::Domain(format!("max_value - value = {gap} at step {t}")));
        }
        xs.push(series.steps[t] as f64);
        ys.push(gap.ln());
    }
    let (slope, intercept, residual) = linear_fit(&xs, &ys)?;
    Ok(FitResult { slope, intercept, window, residual })
}

/// Initial OE growth rate: the forward difference at the third step.
pub fn lambda_oe(series: &TimeSeries) -> Result<f64> {
    if series.len() < 4 {
        return Err(Error::Window(format!("lambda_OE needs 4 points, series has {}", series.len())));
    }
    Ok(series.values[3] - series.values[2])
}

/// OTOC growth rate from `C(t) ~ exp(2 lambda_q t)` at the third step.
pub fn lambda_q(series: &TimeSeries) -> Result<f64> {
    if series.len() < 4 {
        return Err(Error::Window(format!("lambda_q needs 4 points, series has {}", series.len())));
    }
    let (c2, c3) = (series.values[2], series.values[3]);
    if !(c2 > 0.0 && c3 > 0.0) {
        return Err(Error::Domain(format!("OTOC values must be positive, got C(2) = {c2}, C(3) = {c3}")));
    }
    Ok((c3.ln() - c2.ln()) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FluctuationStats {
    pub mean: f64,
    pub std: f64,
    pub max_excursion: f64,
}

/// Mean, population standard deviation and largest `|value - mean|` over
/// `values[tail_start..]`.
pub fn fluctuation_stats(series: &TimeSeries, tail_start: usize) -> Result<FluctuationStats> {
    if tail_start >= series.len() {
        return Err(Error::Window(format!("tail start {tail_start} beyond series of length {}", series.len())));
    }
    let tail = &series.values[tail_start..];
    let n = tail.len() as f64;
    let mean = tail.iter().sum::<f64>() / n;
    let var = tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let max_excursion = tail.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    Ok(FluctuationStats { mean, std: var.sqrt(), max_excursion })
}
