//! Dense complex matrices and pure states.
//!
//! Thin wrappers around `faer` that keep every product single-threaded, so
//! results are bitwise reproducible regardless of how many ensemble workers
//! are running.

use std::ops::{Add, Mul, Sub};
use std::sync::Once;

use faer::linalg::matmul::matmul;
use faer::{Accum, ColRef, Mat, Par, Side};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

static SEQUENTIAL: Once = Once::new();

fn force_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Square dense complex matrix.
#[derive(Clone, Debug)]
pub struct ComplexMatrix {
    inner: Mat<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { inner: Mat::zeros(dim, dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: Mat::identity(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { inner: Mat::from_fn(dim, dim, f) }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.inner[(i, i)] = v;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.inner[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Builds from row-major rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        Ok(Self::from_fn(dim, |r, c| rows[r][c]))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.inner[(row, col)] = value;
    }

    pub fn as_faer(&self) -> &Mat<C64> {
        &self.inner
    }

    pub fn into_faer(self) -> Mat<C64> {
        self.inner
    }

    pub fn from_faer(inner: Mat<C64>) -> Self {
        assert_eq!(inner.nrows(), inner.ncols(), "matrix must be square");
        Self { inner }
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.inner[(r, c)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_fn(self.dim(), |r, c| self.inner[(r, c)] * factor)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in matmul");
        let mut out = Mat::zeros(self.dim(), self.dim());
        matmul(&mut out, Accum::Replace, &self.inner, &rhs.inner, ONE, Par::Seq);
        Self { inner: out }
    }

    /// `U^† self U`, the single-step Heisenberg update.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        let n = self.dim();
        let mut tmp = Mat::zeros(n, n);
        matmul(&mut tmp, Accum::Replace, &self.inner, &u.inner, ONE, Par::Seq);
        let mut out = Mat::zeros(n, n);
        matmul(&mut out, Accum::Replace, u.inner.adjoint(), &tmp, ONE, Par::Seq);
        Self { inner: out }
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim(), v.len(), "dimension mismatch in matvec");
        let mut out = Mat::<C64>::zeros(self.dim(), 1);
        let rhs = ColRef::from_slice(v).as_mat();
        matmul(&mut out, Accum::Replace, &self.inner, rhs, ONE, Par::Seq);
        out.col(0).iter().copied().collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.inner[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.inner[(i, i)]).collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        let n = self.dim();
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in 0..n {
                worst = worst.max((self.inner[(r, c)] - other.inner[(r, c)]).norm());
            }
        }
        worst
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in 0..=c {
                worst = worst.max((self.inner[(r, c)] - self.inner[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `max |U U^† - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.dim();
        let mut prod = Mat::zeros(n, n);
        matmul(&mut prod, Accum::Replace, &self.inner, self.inner.adjoint(), ONE, Par::Seq);
        Self { inner: prod }.max_abs_diff(&Self::identity(n))
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|c| (0..n).all(|r| self.inner[(r, c)].is_finite()))
    }

    /// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
    /// matrix whose columns are the matching orthonormal eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        force_sequential();
        let evd = self
            .inner
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let values = evd.S().column_vector().iter().map(|v| v.re).collect();
        Ok((values, Self { inner: evd.U().to_owned() }))
    }

    /// `f(H)` for Hermitian `H`, evaluated on the spectrum.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> C64) -> Result<ComplexMatrix> {
        let (values, vectors) = self.hermitian_eigen()?;
        Ok(spectral_sum(&values, &vectors, f))
    }

    /// `exp(-i t H)` for Hermitian `H`.
    pub fn exp_i_hermitian(&self, t: f64) -> Result<ComplexMatrix> {
        self.hermitian_function(|lambda| C64::from_polar(1.0, -t * lambda))
    }
}

/// `V diag(f(λ)) V^†`.
pub(crate) fn spectral_sum(values: &[f64], vectors: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let n = vectors.dim();
    let scaled = Mat::from_fn(n, n, |r, c| vectors.inner[(r, c)] * f(values[c]));
    let mut out = Mat::zeros(n, n);
    matmul(&mut out, Accum::Replace, &scaled, vectors.inner.adjoint(), ONE, Par::Seq);
    ComplexMatrix { inner: out }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Tolerance on the norm of a freshly constructed state.
pub const NORM_TOL: f64 = 1e-10;

/// Normalised pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Accepts amplitudes that are already unit-norm within [`NORM_TOL`].
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let norm = norm(&amps);
        if amps.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let norm = norm(&amps);
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Domain(format!("cannot normalise vector of norm {norm}")));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} outside dimension {dim}")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        let applied = op.apply(&self.amps);
        self.amps.iter().zip(&applied).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), |r, c| self.amps[r] * self.amps[c].conj())
    }

    /// `U |self>` without renormalisation.
    pub fn evolved(&self, u: &ComplexMatrix) -> StateVector {
        StateVector { amps: u.apply(&self.amps) }
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}
