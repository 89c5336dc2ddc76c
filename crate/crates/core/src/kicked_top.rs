//! Floquet operator of the kicked top and stroboscopic evolution.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, C64};
use crate::spin_algebra::{rotation, Axis, SpinSpace};

/// Norm drift tolerated along a trajectory.
pub const EVOLVE_NORM_TOL: f64 = 1e-8;
/// Hermiticity drift tolerated along a Heisenberg trajectory.
pub const HEISENBERG_HERM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KickedTopParams {
    pub space: SpinSpace,
    pub kappa: f64,
    pub alpha: f64,
}

impl KickedTopParams {
    /// Kick strength `kappa` with the default quarter-turn `alpha = pi/2`.
    pub fn new(space: SpinSpace, kappa: f64) -> Self {
        Self { space, kappa, alpha: FRAC_PI_2 }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return Err(Error::Domain(format!("kappa = {}", self.kappa)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::Domain(format!("alpha = {}", self.alpha)));
        }
        if self.space.twice_j() == 0 {
            return Err(Error::InvalidSpin("kicked top needs j > 0".into()));
        }
        Ok(())
    }
}

/// Diagonal of `exp(-i kappa/(2j) J_z^2)`.
pub fn kick_phases(space: SpinSpace, kappa: f64) -> Vec<C64> {
    let j = space.j();
    (0..space.dim())
        .map(|q| {
            let m = space.m(q);
            C64::from_polar(1.0, -kappa * m * m / (2.0 * j))
        })
        .collect()
}

/// `exp(-i kappa/(2j) J_z^2) exp(-i alpha J_y)`.
pub fn floquet_unitary(params: KickedTopParams) -> Result<ComplexMatrix> {
    params.validate()?;
    let turn = rotation(params.space, Axis::Y, params.alpha)?;
    Ok(floquet_from_rotation(params, &turn))
}

/// Same as [`floquet_unitary`] but reuses a precomputed `exp(-i alpha J_y)`,
/// which only depends on `(j, alpha)`. Handy for kappa sweeps.
pub fn floquet_from_rotation(params: KickedTopParams, turn: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(turn.dim(), params.space.dim());
    let phases = kick_phases(params.space, params.kappa);
    ComplexMatrix::from_fn(turn.dim(), |r, c| phases[r] * turn.get(r, c))
}

/// `|psi(0)>, ..., |psi(n)>` with `|psi(t+1)> = U |psi(t)>`.
pub fn evolve_state(u: &ComplexMatrix, psi0: &StateVector, n: usize) -> Result<Vec<StateVector>> {
    if u.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: psi0.dim() });
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(psi0.clone());
    for t in 0..n {
        let next = out[t].evolved(u);
        let drift = (next.norm() - 1.0).abs();
        if drift > EVOLVE_NORM_TOL {
            return Err(Error::Domain(format!("norm drift {drift:.3e} at step {}", t + 1)));
        }
        out.push(next);
    }
    Ok(out)
}

/// `A(0), ..., A(n)` with `A(t+1) = U^† A(t) U`.
pub fn heisenberg_evolve(u: &ComplexMatrix, a: &ComplexMatrix, n: usize) -> Result<Vec<ComplexMatrix>> {
    if u.dim() != a.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: a.dim() });
    }
    let herm = a.hermiticity_error();
    if herm > HEISENBERG_HERM_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(a.clone());
    for t in 0..n {
        let next = out[t].conjugate_by(u);
        let herm = next.hermiticity_error();
        if herm > HEISENBERG_HERM_TOL {
            return Err(Error::NotHermitian(herm));
        }
        out.push(next);
    }
    Ok(out)
}

/// `log(2j + 1) / log(kappa / 2)`, defined for `kappa > 2`.
pub fn ehrenfest_time(space: SpinSpace, kappa: f64) -> Result<f64> {
    if !(kappa > 2.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("Ehrenfest estimate needs kappa > 2, got {kappa}")));
    }
    Ok((space.dim() as f64).ln() / (kappa / 2.0).ln())
}
