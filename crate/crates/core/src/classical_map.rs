//! Classical limit of the kicked top (`alpha = pi/2`) on the unit sphere.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const SPHERE_TOL: f64 = 1e-6;
const RENORM_TRIGGER: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self { x: theta.sin() * phi.cos(), y: theta.sin() * phi.sin(), z: theta.cos() }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// `(theta, phi)` with `phi` in `[0, 2pi)`.
    pub fn angles(&self) -> (f64, f64) {
        let theta = self.z.clamp(-1.0, 1.0).acos();
        let mut phi = self.y.atan2(self.x);
        if phi < 0.0 {
            phi += TAU;
        }
        if phi >= TAU {
            phi -= TAU;
        }
        (theta, phi)
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// One kick: a twist about `z` by `kappa X` following the quarter turn.
pub fn classical_step(p: PhasePoint, kappa: f64) -> Result<PhasePoint> {
    let r2 = p.norm_sqr();
    if !r2.is_finite() || (r2 - 1.0).abs() > SPHERE_TOL {
        return Err(Error::NotOnSphere(r2));
    }
    Ok(step_unchecked(p, kappa))
}

fn step_unchecked(p: PhasePoint, kappa: f64) -> PhasePoint {
    let (s, c) = (kappa * p.x).sin_cos();
    let mut next = PhasePoint {
        x: p.z * c + p.y * s,
        y: -p.z * s + p.y * c,
        z: -p.x,
    };
    let r2 = next.norm_sqr();
    if (r2 - 1.0).abs() > RENORM_TRIGGER {
        let r = r2.sqrt();
        next.x /= r;
        next.y /= r;
        next.z /= r;
    }
    next
}

/// Iterates `n` kicks, returning the `n + 1` visited points.
pub fn trajectory(p0: PhasePoint, kappa: f64, n: usize) -> Result<Vec<PhasePoint>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(p0);
    let mut p = p0;
    for _ in 0..n {
        p = classical_step(p, kappa)?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PortraitPoint {
    pub traj_id: usize,
    pub step: usize,
    pub theta: f64,
    pub phi: f64,
}

/// Uniform-on-the-sphere initial conditions (uniform `cos theta` and `phi`)
/// iterated `n_steps` times; every visited point is emitted, initial included.
pub fn phase_portrait(kappa: f64, n_init: usize, n_steps: usize, seed: u64) -> Result<Vec<PortraitPoint>> {
    if n_init == 0 || n_steps == 0 {
        return Err(Error::Domain("phase portrait needs n_init, n_steps >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_init * (n_steps + 1));
    for traj_id in 0..n_init {
        let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
        let phi: f64 = rng.gen_range(0.0..TAU);
        let theta = cos_theta.acos().clamp(0.0, PI);
        let start = PhasePoint::from_angles(theta, phi);
        for (step, p) in trajectory(start, kappa, n_steps)?.into_iter().enumerate() {
            let (theta, phi) = p.angles();
            out.push(PortraitPoint { traj_id, step, theta, phi });
        }
    }
    Ok(out)
}
