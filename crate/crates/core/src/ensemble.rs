//! Seeded coherent-state ensembles and ensemble-averaged diagnostics.
//!
//! Member `k` draws its angles from its own ChaCha stream (`seed`, stream `k`),
//! so a member's state does not depend on how many workers run or in which
//! order. Averages are reduced in member order.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{fotoc_along, otoc_from_operators, Quantity, SeriesMeta, TimeSeries};
use crate::entropy::{oe_total_raw, CoarseGraining};
use crate::error::{Error, Result};
use crate::kicked_top::{evolve_state, floquet_unitary, heisenberg_evolve, KickedTopParams};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::spin_algebra::{coherent_state_unchecked, rotation, Axis, SpinOperators, SpinSpace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// `theta` and `phi` independently uniform on their ranges.
    #[default]
    UniformThetaPhi,
    /// `cos theta` uniform, i.e. uniform area on the sphere.
    UniformSphere,
}

impl std::str::FromStr for Sampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-theta-phi" => Ok(Sampling::UniformThetaPhi),
            "uniform-sphere" => Ok(Sampling::UniformSphere),
            other => Err(Error::Config(format!("unknown sampling `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub seed: u64,
    pub sampling: Sampling,
    pub theta_range: (f64, f64),
    pub phi_range: (f64, f64),
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            count: 100,
            seed: 0,
            sampling: Sampling::UniformThetaPhi,
            theta_range: (0.0, PI),
            phi_range: (0.0, TAU),
        }
    }
}

impl EnsembleSpec {
    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let (t0, t1) = self.theta_range;
        let (p0, p1) = self.phi_range;
        if self.count == 0 {
            return Err(Error::Domain("ensemble count must be at least 1".into()));
        }
        if !(0.0 <= t0 && t0 <= t1 && t1 <= PI) {
            return Err(Error::Domain(format!("theta range ({t0}, {t1}) outside [0, pi]")));
        }
        if !(0.0 <= p0 && p0 < p1 && p1 <= TAU) {
            return Err(Error::Domain(format!("phi range ({p0}, {p1}) outside [0, 2pi)")));
        }
        Ok(())
    }

    /// Angles of member `k`, independent of every other member.
    pub fn member_angles(&self, k: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let (t0, t1) = self.theta_range;
        let theta = match self.sampling {
            Sampling::UniformThetaPhi => {
                if t1 > t0 {
                    rng.gen_range(t0..=t1)
                } else {
                    t0
                }
            }
            Sampling::UniformSphere => {
                let (c_lo, c_hi) = (t1.cos(), t0.cos());
                let c: f64 = if c_hi > c_lo { rng.gen_range(c_lo..=c_hi) } else { c_lo };
                c.clamp(-1.0, 1.0).acos().clamp(t0, t1)
            }
        };
        let phi = rng.gen_range(self.phi_range.0..self.phi_range.1);
        (theta, phi)
    }

    pub fn angles(&self) -> Vec<(f64, f64)> {
        (0..self.count).map(|k| self.member_angles(k)).collect()
    }
}

pub fn sample_states(space: SpinSpace, spec: &EnsembleSpec) -> Result<Vec<StateVector>> {
    spec.validate()?;
    spec.angles()
        .into_iter()
        .map(|(theta, phi)| coherent_state_unchecked(space, theta, phi))
        .collect()
}

/// What to record along each member's evolution.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantitySpec {
    Oe(CoarseGraining),
    /// OTOC of the given spin component with itself.
    Otoc(Axis),
    /// FOTOC with an x-rotation of the given angle as perturbation.
    Fotoc(f64),
}

impl QuantitySpec {
    pub fn quantity(&self) -> Quantity {
        match self {
            QuantitySpec::Oe(_) => Quantity::Oe,
            QuantitySpec::Otoc(_) => Quantity::Otoc,
            QuantitySpec::Fotoc(_) => Quantity::Fotoc,
        }
    }
}

/// Everything about one `(j, kappa, alpha)` evolution that members can share.
pub struct SharedDynamics {
    pub params: KickedTopParams,
    pub floquet: ComplexMatrix,
}

impl SharedDynamics {
    pub fn new(params: KickedTopParams) -> Result<Self> {
        Ok(Self { params, floquet: floquet_unitary(params)? })
    }

    pub fn from_floquet(params: KickedTopParams, floquet: ComplexMatrix) -> Self {
        Self { params, floquet }
    }
}

/// Per-member series, in member order.
pub fn member_series(
    dynamics: &SharedDynamics,
    quantity: &QuantitySpec,
    states: &[StateVector],
    n: usize,
) -> Result<Vec<Vec<f64>>> {
    let space = dynamics.params.space;
    let u = &dynamics.floquet;
    match quantity {
        QuantitySpec::Oe(cg) => {
            if cg.dim() != space.dim() {
                return Err(Error::DimensionMismatch { expected: space.dim(), found: cg.dim() });
            }
            states
                .par_iter()
                .map(|psi| {
                    let traj = evolve_state(u, psi, n)?;
                    Ok(traj.iter().map(|p| oe_total_raw(p.amplitudes(), cg)).collect())
                })
                .collect()
        }
        QuantitySpec::Otoc(axis) => {
            if n == 0 {
                return Err(Error::Window("OTOC needs at least one step".into()));
            }
            let a = SpinOperators::new(space).component(*axis).clone();
            let ops = heisenberg_evolve(u, &a, n)?;
            states.par_iter().map(|psi| otoc_from_operators(psi, &ops)).collect()
        }
        QuantitySpec::Fotoc(delta) => {
            let w = rotation(space, Axis::X, *delta)?;
            states
                .par_iter()
                .map(|psi| Ok(fotoc_along(&evolve_state(u, psi, n)?, &w)))
                .collect()
        }
    }
}

/// Pointwise mean, summed in member order.
pub fn pointwise_mean(members: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = members.first().ok_or_else(|| Error::Domain("empty ensemble".into()))?;
    let mut acc = vec![0.0; first.len()];
    for m in members {
        if m.len() != acc.len() {
            return Err(Error::DimensionMismatch { expected: acc.len(), found: m.len() });
        }
        acc.iter_mut().zip(m).for_each(|(a, v)| *a += v);
    }
    let n = members.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

pub fn averaged_series_with(
    dynamics: &SharedDynamics,
    quantity: &QuantitySpec,
    spec: &EnsembleSpec,
    n: usize,
) -> Result<TimeSeries> {
    let space = dynamics.params.space;
    let states = sample_states(space, spec)?;
    let members = member_series(dynamics, quantity, &states, n)?;
    let mut meta = SeriesMeta::new(quantity.quantity(), space)
        .with_dynamics(dynamics.params.kappa, dynamics.params.alpha);
    meta.ensemble_size = spec.count;
    meta.seed = Some(spec.seed);
    TimeSeries::new(pointwise_mean(&members)?, meta)
}

/// Ensemble mean of a diagnostic over `spec.count` seeded coherent states.
pub fn averaged_series(
    params: KickedTopParams,
    quantity: &QuantitySpec,
    spec: &EnsembleSpec,
    n: usize,
) -> Result<TimeSeries> {
    averaged_series_with(&SharedDynamics::new(params)?, quantity, spec, n)
}

/// Worker pool capped by `QKT_OE_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("QKT_OE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Config(format!("QKT_OE_THREADS = `{v}` is not a positive integer")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}
