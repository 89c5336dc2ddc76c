//! Angular momentum operators, rotations and spin coherent states in the
//! `|j, m>` basis.
//!
//! Basis index `q` runs over `0..d` with `m = j - q`, so `q = 0` is `|j, j>`
//! and `q = d - 1` is `|j, -j>`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector, C64, ZERO};

/// Hilbert space of a single spin `j`, stored as `2j` so half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SpinSpace {
    twice_j: u32,
}

impl SpinSpace {
    pub fn from_twice_j(twice_j: u32) -> Self {
        Self { twice_j }
    }

    /// `d = 2j + 1`; `d` must be at least 1.
    pub fn from_dim(dim: usize) -> Result<Self> {
        if dim == 0 || dim > u32::MAX as usize {
            return Err(Error::InvalidSpin(format!("dimension {dim}")));
        }
        Ok(Self { twice_j: (dim - 1) as u32 })
    }

    /// Accepts non-negative integers and half-integers.
    pub fn from_j(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !(j >= 0.0) || !j.is_finite() || (twice - twice.round()).abs() > 1e-9 {
            return Err(Error::InvalidSpin(format!("j = {j}")));
        }
        Ok(Self { twice_j: twice.round() as u32 })
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        f64::from(self.twice_j) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// Magnetic quantum number of basis index `q`.
    pub fn m(&self, q: usize) -> f64 {
        self.j() - q as f64
    }

    /// Basis index of magnetic quantum number `m`, if it belongs to the space.
    pub fn index_of(&self, m: f64) -> Option<usize> {
        let q = self.j() - m;
        let qr = q.round();
        ((q - qr).abs() < 1e-9 && qr >= 0.0 && (qr as usize) < self.dim()).then_some(qr as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn build_jz(space: SpinSpace) -> ComplexMatrix {
    let diag: Vec<f64> = (0..space.dim()).map(|q| space.m(q)).collect();
    ComplexMatrix::from_real_diagonal(&diag)
}

/// `J_-` when `lowering`, otherwise `J_+`.
pub fn build_ladder(space: SpinSpace, lowering: bool) -> ComplexMatrix {
    let j = space.j();
    let d = space.dim();
    let mut out = ComplexMatrix::zeros(d);
    // <j, m-1| J_- |j, m> sits at (q + 1, q).
    for q in 0..d.saturating_sub(1) {
        let m = space.m(q);
        let amp = C64::new((j * (j + 1.0) - m * (m - 1.0)).sqrt(), 0.0);
        if lowering {
            out.set(q + 1, q, amp);
        } else {
            out.set(q, q + 1, amp);
        }
    }
    out
}

/// The three Cartesian components, built once from the ladder operators.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub space: SpinSpace,
    pub jx: ComplexMatrix,
    pub jy: ComplexMatrix,
    pub jz: ComplexMatrix,
}

impl SpinOperators {
    pub fn new(space: SpinSpace) -> Self {
        let plus = build_ladder(space, false);
        let minus = build_ladder(space, true);
        let jx = (&plus + &minus).scale(C64::new(0.5, 0.0));
        // (J+ - J-) / 2i
        let jy = (&plus - &minus).scale(C64::new(0.0, -0.5));
        Self { space, jx, jy, jz: build_jz(space) }
    }

    pub fn component(&self, axis: Axis) -> &ComplexMatrix {
        match axis {
            Axis::X => &self.jx,
            Axis::Y => &self.jy,
            Axis::Z => &self.jz,
        }
    }

    pub fn casimir(&self) -> ComplexMatrix {
        let xx = self.jx.matmul(&self.jx);
        let yy = self.jy.matmul(&self.jy);
        let zz = self.jz.matmul(&self.jz);
        &(&xx + &yy) + &zz
    }
}

/// `exp(-i angle J_axis)`.
pub fn rotation(space: SpinSpace, axis: Axis, angle: f64) -> Result<ComplexMatrix> {
    if !angle.is_finite() {
        return Err(Error::Domain(format!("rotation angle {angle}")));
    }
    if axis == Axis::Z {
        let diag: Vec<C64> = (0..space.dim()).map(|q| C64::from_polar(1.0, -angle * space.m(q))).collect();
        return Ok(ComplexMatrix::from_diagonal(&diag));
    }
    let ops = SpinOperators::new(space);
    ops.component(axis).exp_i_hermitian(angle)
}

const THETA_POLE_TOL: f64 = 1e-9;

/// Spin coherent state `|theta, phi>` with `<J>/j` pointing along
/// `(sin θ cos φ, sin θ sin φ, cos θ)`.
///
/// Amplitudes are `sqrt(C(2j, q)) sin^q(θ/2) cos^(2j-q)(θ/2) e^{i q φ}`, the
/// closed form of `e^{β J_-} |j, j> / (1 + |β|²)^j`, evaluated in log space so
/// `d ~ 1000` neither overflows nor underflows.
pub fn coherent_state(space: SpinSpace, theta: f64, phi: f64) -> Result<StateVector> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, pi]")));
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(Error::Domain(format!("phi = {phi} outside [0, 2pi)")));
    }
    coherent_state_unchecked(space, theta, phi)
}

pub(crate) fn coherent_state_unchecked(space: SpinSpace, theta: f64, phi: f64) -> Result<StateVector> {
    let d = space.dim();
    let n = space.twice_j() as usize;
    if theta <= THETA_POLE_TOL {
        return StateVector::basis(d, 0);
    }
    if PI - theta <= THETA_POLE_TOL {
        return StateVector::basis(d, d - 1);
    }
    let ln_sin = (theta / 2.0).sin().ln();
    let ln_cos = (theta / 2.0).cos().ln();
    let ln_binom = ln_binomial_row(n);
    let amps: Vec<C64> = (0..d)
        .map(|q| {
            let ln_mag = 0.5 * ln_binom[q] + q as f64 * ln_sin + (n - q) as f64 * ln_cos;
            let mag = ln_mag.exp();
            if mag == 0.0 {
                ZERO
            } else {
                C64::from_polar(mag, q as f64 * phi)
            }
        })
        .collect();
    // Renormalise away the round-off in the log-space evaluation.
    StateVector::normalized(amps)
}

/// `ln C(n, k)` for `k = 0..=n`.
fn ln_binomial_row(n: usize) -> Vec<f64> {
    let mut ln_fact = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    ln_fact.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        ln_fact.push(acc);
    }
    (0..=n).map(|k| ln_fact[n] - ln_fact[k] - ln_fact[n - k]).collect()
}

/// Tolerance for the density-matrix preconditions.
pub const DENSITY_TOL: f64 = 1e-10;

/// Validates Hermiticity, unit trace and positivity, returning the spectrum.
pub fn density_spectrum(rho: &ComplexMatrix) -> Result<Vec<f64>> {
    if !rho.is_finite() {
        return Err(Error::NotDensityMatrix("non-finite entries".into()));
    }
    let herm = rho.hermiticity_error();
    if herm > DENSITY_TOL {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (deviation {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::NotDensityMatrix(format!("trace {tr}")));
    }
    let (values, _) = rho.hermitian_eigen()?;
    if let Some(&min) = values.first() {
        if min < -DENSITY_TOL {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {min:.3e}")));
        }
    }
    Ok(values)
}

/// `-Tr ρ ln ρ` in nats.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let spectrum = density_spectrum(rho)?;
    Ok(spectrum.iter().map(|&l| if l > 0.0 { -l * l.ln() } else { 0.0 }).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn half(twice_j: u32) -> SpinSpace {
        SpinSpace::from_twice_j(twice_j)
    }

    fn diag_re(m: &ComplexMatrix) -> Vec<f64> {
        m.diagonal().iter().map(|v| v.re).collect()
    }

    #[test]
    fn space_conventions() {
        let s = SpinSpace::from_j(1.5).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.m(0), 1.5);
        assert_eq!(s.m(3), -1.5);
        assert_eq!(s.index_of(-0.5), Some(2));
        assert_eq!(s.index_of(2.5), None);
        assert!(SpinSpace::from_j(0.3).is_err());
        assert!(SpinSpace::from_j(-1.0).is_err());
        assert_eq!(SpinSpace::from_dim(400).unwrap().j(), 199.5);
        assert!(SpinSpace::from_dim(0).is_err());
    }

    #[test]
    fn jz_diagonals() {
        assert_eq!(diag_re(&build_jz(half(1))), vec![0.5, -0.5]);
        assert_eq!(diag_re(&build_jz(half(2))), vec![1.0, 0.0, -1.0]);
        assert_eq!(diag_re(&build_jz(half(3))), vec![1.5, 0.5, -0.5, -1.5]);
    }

    #[test]
    fn spin_half_lowering() {
        let jm = build_ladder(half(1), true);
        assert_eq!(jm.get(1, 0), C64::new(1.0, 0.0));
        assert_eq!(jm.get(0, 1), ZERO);
        assert_eq!(jm.get(0, 0), ZERO);
        let jp = build_ladder(half(1), false);
        assert!(jp.max_abs_diff(&jm.adjoint()) == 0.0);
    }

    #[test]
    fn spin_one_commutator() {
        let ops = SpinOperators::new(half(2));
        let lhs = ops.jx.commutator(&ops.jy);
        let rhs = ops.jz.scale(C64::new(0.0, 1.0));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn spin_two_casimir() {
        let ops = SpinOperators::new(half(4));
        let expected = ComplexMatrix::identity(5).scale(C64::new(6.0, 0.0));
        assert!(ops.casimir().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn zero_rotation_is_identity() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let r = rotation(half(7), axis, 0.0).unwrap();
            assert!(r.max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
        }
    }

    #[test]
    fn spin_half_pi_rotation_about_y() {
        // exp(-i pi sigma_y / 2) = [[0, -1], [1, 0]]
        let r = rotation(half(1), Axis::Y, PI).unwrap();
        let expected = ComplexMatrix::from_rows(&[
            vec![ZERO, C64::new(-1.0, 0.0)],
            vec![C64::new(1.0, 0.0), ZERO],
        ])
        .unwrap();
        assert!(r.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn rotation_inverse_j10() {
        let s = half(20);
        let a = rotation(s, Axis::Y, 0.7).unwrap();
        let b = rotation(s, Axis::Y, -0.7).unwrap();
        assert!(a.matmul(&b).max_abs_diff(&ComplexMatrix::identity(21)) < 1e-10);
    }

    #[test]
    fn rotation_rejects_nan() {
        assert!(rotation(half(2), Axis::X, f64::NAN).is_err());
    }

    #[test]
    fn coherent_poles() {
        let s = half(9);
        let north = coherent_state(s, 0.0, 1.0).unwrap();
        assert_eq!(north, StateVector::basis(10, 0).unwrap());
        let south = coherent_state(s, PI, 0.3).unwrap();
        assert!((south.amplitudes()[9].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_spin_half_equator() {
        let psi = coherent_state(half(1), PI / 2.0, 0.0).unwrap();
        assert!((psi.amplitudes()[0] - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
        assert!((psi.amplitudes()[1] - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn coherent_matches_exponential_of_lowering() {
        // Independent route: e^{beta J_-}|j,j> / (1+|beta|^2)^j via a truncated series.
        let s = half(6);
        let (theta, phi): (f64, f64) = (1.1, 2.3);
        let beta = C64::from_polar((theta / 2.0).tan(), phi);
        let jm = build_ladder(s, true);
        let mut term = vec![ZERO; 7];
        term[0] = C64::new(1.0, 0.0);
        let mut acc = term.clone();
        for k in 1..=6 {
            term = jm.apply(&term).iter().map(|a| a * beta / k as f64).collect();
            acc.iter_mut().zip(&term).for_each(|(a, t)| *a += t);
        }
        let scale = (1.0 + beta.norm_sqr()).powf(-s.j());
        let psi = coherent_state(s, theta, phi).unwrap();
        for (a, b) in acc.iter().zip(psi.amplitudes()) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn coherent_direction() {
        let s = half(31);
        let ops = SpinOperators::new(s);
        let (theta, phi) = (0.9, 4.0);
        let psi = coherent_state(s, theta, phi).unwrap();
        let j = s.j();
        assert!((psi.expectation(&ops.jx).re / j - theta.sin() * phi.cos()).abs() < 1e-9);
        assert!((psi.expectation(&ops.jy).re / j - theta.sin() * phi.sin()).abs() < 1e-9);
        assert!((psi.expectation(&ops.jz).re / j - theta.cos()).abs() < 1e-9);
    }

    #[test]
    fn coherent_large_j_is_finite() {
        let s = SpinSpace::from_dim(1024).unwrap();
        let psi = coherent_state(s, 1.3, 0.2).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        assert!(psi.amplitudes().iter().all(|a| a.is_finite()));
    }

    #[test]
    fn coherent_domain_errors() {
        let s = half(2);
        assert!(matches!(coherent_state(s, -0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(coherent_state(s, 3.2, 0.0), Err(Error::Domain(_))));
        assert!(matches!(coherent_state(s, 1.0, 2.0 * PI), Err(Error::Domain(_))));
    }

    #[test]
    fn entropy_examples() {
        let psi = coherent_state(half(3), 0.4, 0.1).unwrap();
        assert!(von_neumann_entropy(&psi.projector()).unwrap().abs() < 1e-9);
        let mixed = ComplexMatrix::from_real_diagonal(&[0.25; 4]);
        assert!((von_neumann_entropy(&mixed).unwrap() - 4f64.ln()).abs() < 1e-12);
        let half_mixed = ComplexMatrix::from_real_diagonal(&[0.5, 0.5, 0.0, 0.0]);
        assert!((von_neumann_entropy(&half_mixed).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn entropy_rejects_non_density() {
        let bad_trace = ComplexMatrix::from_real_diagonal(&[0.5, 0.4]);
        assert!(matches!(von_neumann_entropy(&bad_trace), Err(Error::NotDensityMatrix(_))));
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(von_neumann_entropy(&negative), Err(Error::NotDensityMatrix(_))));
        let mut skew = ComplexMatrix::from_real_diagonal(&[0.5, 0.5]);
        skew.set(0, 1, C64::new(0.1, 0.0));
        assert!(matches!(von_neumann_entropy(&skew), Err(Error::NotDensityMatrix(_))));
    }
}
