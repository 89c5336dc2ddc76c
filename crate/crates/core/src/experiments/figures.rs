use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;

use super::config::RunConfig;
use super::output::{Table, Value};
use crate::classical_map::{phase_portrait, PortraitPoint};
use crate::diagnostics::{
    fit_exponential_approach, fluctuation_stats, fotoc_along, linear_fit, lambda_oe, lambda_q, FitResult,
    FluctuationStats, Quantity, SeriesMeta, TimeSeries,
};
use crate::ensemble::{averaged_series_with, sample_states, QuantitySpec, SharedDynamics};
use crate::entropy::{oe_total_raw, uniform_partition};
use crate::error::{Error, Result};
use crate::kicked_top::{ehrenfest_time, evolve_state, floquet_from_rotation, KickedTopParams};
use crate::spin_algebra::{coherent_state, rotation, Axis, SpinSpace};

fn sampling_label(cfg: &RunConfig) -> &'static str {
    match cfg.ensemble.sampling {
        crate::ensemble::Sampling::UniformThetaPhi => "uniform-theta-phi",
        crate::ensemble::Sampling::UniformSphere => "uniform-sphere",
    }
}

/// Floquet operators for every kappa at one dimension, sharing the rotation.
fn dynamics_for(cfg: &RunConfig, space: SpinSpace) -> Result<Vec<SharedDynamics>> {
    let turn = rotation(space, Axis::Y, cfg.alpha)?;
    Ok(cfg
        .kappas
        .iter()
        .map(|&kappa| {
            let params = KickedTopParams::new(space, kappa).with_alpha(cfg.alpha);
            SharedDynamics::from_floquet(params, floquet_from_rotation(params, &turn))
        })
        .collect())
}

pub fn fig1_phase_space(cfg: &RunConfig) -> Result<Vec<(f64, Vec<PortraitPoint>)>> {
    cfg.kappas
        .par_iter()
        .map(|&kappa| Ok((kappa, phase_portrait(kappa, cfg.n_init, cfg.steps, cfg.ensemble.seed)?)))
        .collect()
}

pub fn fig1_tables(cfg: &RunConfig, portraits: &[(f64, Vec<PortraitPoint>)]) -> Vec<Table> {
    portraits
        .iter()
        .map(|(kappa, points)| {
            let mut t = Table::new(format!("phase_portrait_kappa_{kappa:?}"), &["traj_id", "step", "theta", "phi"], 1)
                .with_meta("kappa", format!("{kappa:?}"))
                .with_meta("n_init", cfg.n_init)
                .with_meta("steps", cfg.steps);
            for p in points {
                t.push(vec![p.traj_id.into(), p.step.into(), p.theta.into(), p.phi.into()]);
            }
            t
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Row {
    pub dim: usize,
    /// `None` for the unevolved initial states.
    pub kappa: Option<f64>,
    pub mu: usize,
    pub oe: f64,
}

/// Powers of two dividing `dim`, then `dim` itself.
pub fn mu_ladder(dim: usize) -> Vec<usize> {
    let mut mus: Vec<usize> = std::iter::successors(Some(1usize), |m| m.checked_mul(2))
        .take_while(|&m| m <= dim && dim.is_multiple_of(m))
        .collect();
    if mus.last() != Some(&dim) {
        mus.push(dim);
    }
    mus
}

/// Ensemble-mean OE against uniform block length, for the initial coherent
/// states and after `steps` kicks at each kappa.
pub fn fig2_oe_vs_mu(cfg: &RunConfig) -> Result<Vec<Fig2Row>> {
    let mut rows = Vec::new();
    for &space in &cfg.spaces {
        let dim = space.dim();
        let cgs = mu_ladder(dim).into_iter().map(|mu| uniform_partition(dim, mu)).collect::<Result<Vec<_>>>()?;
        let states = sample_states(space, &cfg.ensemble)?;
        let n = states.len() as f64;
        let mean_oe = |amps: &[Vec<crate::linalg::C64>]| -> Vec<f64> {
            cgs.iter().map(|cg| amps.iter().map(|a| oe_total_raw(a, cg)).sum::<f64>() / n).collect()
        };
        let initial: Vec<_> = states.iter().map(|s| s.amplitudes().to_vec()).collect();
        for (cg, oe) in cgs.iter().zip(mean_oe(&initial)) {
            rows.push(Fig2Row { dim, kappa: None, mu: cg.blocks()[0].len, oe });
        }
        let per_kappa = dynamics_for(cfg, space)?
            .par_iter()
            .map(|dynm| {
                let finals = states
                    .par_iter()
                    .map(|psi| {
                        let traj = evolve_state(&dynm.floquet, psi, cfg.steps)?;
                        Ok(traj.last().expect("non-empty trajectory").amplitudes().to_vec())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((dynm.params.kappa, mean_oe(&finals)))
            })
            .collect::<Result<Vec<_>>>()?;
        for (kappa, oes) in per_kappa {
            for (cg, oe) in cgs.iter().zip(oes) {
                rows.push(Fig2Row { dim, kappa: Some(kappa), mu: cg.blocks()[0].len, oe });
            }
        }
    }
    Ok(rows)
}

pub fn fig2_tables(cfg: &RunConfig, rows: &[Fig2Row]) -> Vec<Table> {
    let mut t = Table::new("oe_vs_mu", &["series", "kappa", "d", "mu", "ln_mu", "oe"], 3)
        .with_meta("evolution_steps", cfg.steps)
        .with_meta("sampling", sampling_label(cfg));
    for r in rows {
        let series = if r.kappa.is_some() { "evolved" } else { "unevolved" };
        t.push(vec![series.into(), r.kappa.into(), r.dim.into(), r.mu.into(), (r.mu as f64).ln().into(), r.oe.into()]);
    }
    vec![t]
}

#[derive(Clone, Debug)]
pub struct Fig3Result {
    /// One ensemble-mean OE series per (dimension, kappa).
    pub series: Vec<TimeSeries>,
    /// Saturation-approach fit of each series against `ln d`.
    pub fits: Vec<FitResult>,
}

pub fn fig3_oe_dynamics(cfg: &RunConfig) -> Result<Fig3Result> {
    let mut series = Vec::new();
    for &space in &cfg.spaces {
        let cg = cfg.coarse_graining.build(space.dim())?;
        let quantity = QuantitySpec::Oe(cg);
        let batch = dynamics_for(cfg, space)?
            .par_iter()
            .map(|dynm| averaged_series_with(dynm, &quantity, &cfg.ensemble, cfg.steps))
            .collect::<Result<Vec<_>>>()?;
        series.extend(batch);
    }
    let fits = series
        .iter()
        .map(|s| {
            let dim = s.meta.dim();
            fit_exponential_approach(s, (dim as f64).ln(), cfg.fit_window)
        })
        .collect::<Result<_>>()?;
    Ok(Fig3Result { series, fits })
}

pub fn fig3_tables(cfg: &RunConfig, res: &Fig3Result) -> Vec<Table> {
    let cg_label = cfg.spaces.first().map(|s| cfg.coarse_graining.label(s.dim())).unwrap_or_default();
    let mut series = Table::new("oe_series", &["d", "kappa", "step", "oe"], 2)
        .with_meta("coarse_graining", &cg_label)
        .with_meta("sampling", sampling_label(cfg))
        .with_meta("count", cfg.ensemble.count);
    let mut fits = Table::new(
        "fits",
        &["d", "kappa", "slope", "intercept", "residual", "fit_first", "fit_last", "oe_max"],
        2,
    )
    .with_meta("coarse_graining", &cg_label);
    for (s, f) in res.series.iter().zip(&res.fits) {
        let d = s.meta.dim();
        for (step, v) in s.steps.iter().zip(&s.values) {
            series.push(vec![d.into(), s.meta.kappa.into(), (*step).into(), (*v).into()]);
        }
        fits.push(vec![
            d.into(),
            s.meta.kappa.into(),
            f.slope.into(),
            f.intercept.into(),
            f.residual.into(),
            f.window.0.into(),
            f.window.1.into(),
            (d as f64).ln().into(),
        ]);
    }
    vec![series, fits]
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateRow {
    pub dim: usize,
    pub kappa: f64,
    pub lambda_oe: f64,
    pub lambda_q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub dim: usize,
    pub quantity: Quantity,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct Fig4Result {
    pub rows: Vec<RateRow>,
    /// Linear fits against kappa: OE then OTOC, per dimension.
    pub fits: Vec<RateFit>,
}

pub fn fig4_rates_vs_kappa(cfg: &RunConfig) -> Result<Fig4Result> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &space in &cfg.spaces {
        let cg = cfg.coarse_graining.build(space.dim())?;
        let oe_q = QuantitySpec::Oe(cg);
        let otoc_q = QuantitySpec::Otoc(Axis::Z);
        let batch = dynamics_for(cfg, space)?
            .par_iter()
            .map(|dynm| {
                let oe = averaged_series_with(dynm, &oe_q, &cfg.ensemble, cfg.steps)?;
                let otoc = averaged_series_with(dynm, &otoc_q, &cfg.ensemble, cfg.steps)?;
                Ok(RateRow {
                    dim: space.dim(),
                    kappa: dynm.params.kappa,
                    lambda_oe: lambda_oe(&oe)?,
                    lambda_q: lambda_q(&otoc)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let kappas: Vec<f64> = batch.iter().map(|r| r.kappa).collect();
        for (quantity, ys) in [
            (Quantity::Oe, batch.iter().map(|r| r.lambda_oe).collect::<Vec<_>>()),
            (Quantity::Otoc, batch.iter().map(|r| r.lambda_q).collect()),
        ] {
            let (slope, intercept, residual) = linear_fit(&kappas, &ys)?;
            fits.push(RateFit { dim: space.dim(), quantity, slope, intercept, residual });
        }
        rows.extend(batch);
    }
    Ok(Fig4Result { rows, fits })
}

pub fn fig4_tables(cfg: &RunConfig, res: &Fig4Result) -> Vec<Table> {
    let grid = cfg.kappas.iter().map(|k| format!("{k:?}")).collect::<Vec<_>>().join(";");
    let mut rates = Table::new("rates", &["d", "kappa", "lambda_oe", "lambda_q"], 1)
        .with_meta("kappa_grid", &grid)
        .with_meta("coarse_graining", cfg.spaces.first().map(|s| cfg.coarse_graining.label(s.dim())).unwrap_or_default())
        .with_meta("otoc_operator", "Jz");
    for r in &res.rows {
        rates.push(vec![r.dim.into(), r.kappa.into(), r.lambda_oe.into(), r.lambda_q.into()]);
    }
    let mut fits = Table::new("fits", &["d", "quantity", "slope", "intercept", "residual"], 2).with_meta("kappa_grid", &grid);
    for f in &res.fits {
        fits.push(vec![f.dim.into(), f.quantity.tag().into(), f.slope.into(), f.intercept.into(), f.residual.into()]);
    }
    vec![rates, fits]
}

#[derive(Clone, Debug)]
pub struct SmallJSeries {
    pub kappa: f64,
    pub coarse_graining: String,
    pub otoc: TimeSeries,
    pub oe: TimeSeries,
}

pub fn fig56_small_j(cfg: &RunConfig) -> Result<Vec<SmallJSeries>> {
    let jobs: Vec<(SpinSpace, f64)> =
        cfg.spaces.iter().flat_map(|&s| cfg.kappas.iter().map(move |&k| (s, k))).collect();
    jobs.par_iter()
        .map(|&(space, kappa)| {
            let params = KickedTopParams::new(space, kappa).with_alpha(cfg.alpha);
            let dynm = SharedDynamics::new(params)?;
            let cg = cfg.coarse_graining.build(space.dim())?;
            Ok(SmallJSeries {
                kappa,
                coarse_graining: cfg.coarse_graining.label(space.dim()),
                otoc: averaged_series_with(&dynm, &QuantitySpec::Otoc(Axis::Z), &cfg.ensemble, cfg.steps)?,
                oe: averaged_series_with(&dynm, &QuantitySpec::Oe(cg), &cfg.ensemble, cfg.steps)?,
            })
        })
        .collect()
}

pub fn fig56_tables(cfg: &RunConfig, res: &[SmallJSeries]) -> Vec<Table> {
    let mut otoc = Table::new("otoc", &["j", "d", "kappa", "step", "otoc"], 3)
        .with_meta("otoc_operator", "Jz")
        .with_meta("count", cfg.ensemble.count);
    let mut oe = Table::new("oe", &["j", "d", "kappa", "coarse_graining", "step", "oe"], 4).with_meta("count", cfg.ensemble.count);
    for r in res {
        let (j, d) = (r.otoc.meta.j, r.otoc.meta.dim());
        for (step, v) in r.otoc.steps.iter().zip(&r.otoc.values) {
            otoc.push(vec![j.into(), d.into(), r.kappa.into(), (*step).into(), (*v).into()]);
        }
        for (step, v) in r.oe.steps.iter().zip(&r.oe.values) {
            oe.push(vec![
                j.into(),
                d.into(),
                r.kappa.into(),
                r.coarse_graining.as_str().into(),
                (*step).into(),
                (*v).into(),
            ]);
        }
    }
    vec![otoc, oe]
}

/// Initial points of the long-time comparison: a saddle and a chaotic point.
pub const SADDLE_POINT: (f64, f64) = (FRAC_PI_2, FRAC_PI_2);
pub const CHAOTIC_POINT: (f64, f64) = (FRAC_PI_4, FRAC_PI_4);

#[derive(Clone, Debug)]
pub struct PointRun {
    pub label: &'static str,
    pub theta: f64,
    pub phi: f64,
    pub kappa: f64,
    pub tail_start: usize,
    pub fotoc: TimeSeries,
    pub oe: TimeSeries,
    pub fotoc_stats: FluctuationStats,
    pub oe_stats: FluctuationStats,
}

/// `max(20, ceil(4 t_E))` unless the config fixes it.
pub fn tail_start(cfg: &RunConfig, space: SpinSpace, kappa: f64) -> Result<usize> {
    let t = match cfg.tail_start {
        Some(t) => t,
        None => {
            let te = ehrenfest_time(space, kappa)
                .map_err(|e| Error::Config(format!("set tail_start explicitly: {e}")))?;
            ((4.0 * te).ceil() as usize).max(20)
        }
    };
    if t >= cfg.steps {
        return Err(Error::Config(format!("tail start {t} leaves no tail within {} steps", cfg.steps)));
    }
    Ok(t)
}

pub fn fig7_saddle_vs_chaos(cfg: &RunConfig) -> Result<Vec<PointRun>> {
    let mut runs = Vec::new();
    for &space in &cfg.spaces {
        let cg = cfg.coarse_graining.build(space.dim())?;
        let dynamics = dynamics_for(cfg, space)?;
        let mut jobs = Vec::new();
        for dynm in &dynamics {
            let tail = tail_start(cfg, space, dynm.params.kappa)?;
            for (label, point) in [("saddle", SADDLE_POINT), ("chaotic", CHAOTIC_POINT)] {
                jobs.push((label, point, tail, dynm));
            }
        }
        let w = rotation(space, Axis::X, cfg.delta)?;
        let batch = jobs
            .par_iter()
            .map(|&(label, (theta, phi), tail, dynm)| {
                let psi = coherent_state(space, theta, phi)?;
                let traj = evolve_state(&dynm.floquet, &psi, cfg.steps)?;
                let meta = |q| SeriesMeta::new(q, space).with_dynamics(dynm.params.kappa, dynm.params.alpha);
                let fotoc = TimeSeries::new(fotoc_along(&traj, &w), meta(Quantity::Fotoc))?;
                let oe = TimeSeries::new(traj.iter().map(|p| oe_total_raw(p.amplitudes(), &cg)).collect(), meta(Quantity::Oe))?;
                Ok(PointRun {
                    label,
                    theta,
                    phi,
                    kappa: dynm.params.kappa,
                    tail_start: tail,
                    fotoc_stats: fluctuation_stats(&fotoc, tail)?,
                    oe_stats: fluctuation_stats(&oe, tail)?,
                    fotoc,
                    oe,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        runs.extend(batch);
    }
    Ok(runs)
}

pub fn fig7_tables(cfg: &RunConfig, runs: &[PointRun]) -> Vec<Table> {
    let mut series = Table::new("series", &["point", "d", "kappa", "theta", "phi", "step", "fotoc", "oe"], 5)
        .with_meta("delta", format!("{:?}", cfg.delta))
        .with_meta("coarse_graining", cfg.spaces.first().map(|s| cfg.coarse_graining.label(s.dim())).unwrap_or_default());
    let mut stats = Table::new(
        "fluctuations",
        &["point", "d", "kappa", "quantity", "tail_start", "mean", "std", "max_excursion"],
        4,
    );
    for r in runs {
        let d = r.oe.meta.dim();
        let key = || -> Vec<Value> { vec![r.label.into(), d.into(), r.kappa.into()] };
        for ((step, f), o) in r.fotoc.steps.iter().zip(&r.fotoc.values).zip(&r.oe.values) {
            let mut row = key();
            row.extend([r.theta.into(), r.phi.into(), (*step).into(), (*f).into(), (*o).into()]);
            series.push(row);
        }
        for (q, st) in [(Quantity::Fotoc, &r.fotoc_stats), (Quantity::Oe, &r.oe_stats)] {
            let mut row = key();
            row.extend([q.tag().into(), r.tail_start.into(), st.mean.into(), st.std.into(), st.max_excursion.into()]);
            stats.push(row);
        }
    }
    vec![series, stats]
}
