//! Coarse-grainings over the `J_z` eigenbasis and observational entropy.
//!
//! A coarse-graining is a partition of the basis indices into contiguous
//! blocks. Every projector is diagonal, so a macrostate probability is a
//! partial sum of `|psi_q|^2` and one entropy evaluation is `O(d)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, StateVector};
use crate::spin_algebra::{density_spectrum, von_neumann_entropy};

/// Contiguous block `[start, start + len)` of basis indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn end(&self) -> usize {
        self.start + self.len
    }

    pub fn volume(&self) -> usize {
        self.len
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoarseGraining {
    dim: usize,
    blocks: Vec<Block>,
}

/// Which half of the basis carries the finer (`mu = 2`) blocks in
/// [`half_half_partition`]. `FineFirst` puts them on the low-`q` (high-`m`) side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum HalfHalfOrder {
    #[default]
    FineFirst,
    CoarseFirst,
}

impl CoarseGraining {
    /// Builds consecutive blocks with the given volumes, which must be
    /// non-zero and sum to `dim`.
    pub fn from_volumes(dim: usize, volumes: &[usize]) -> Result<Self> {
        if volumes.contains(&0) {
            return Err(Error::InvalidCoarseGraining("zero-volume block".into()));
        }
        let total: usize = volumes.iter().sum();
        if total != dim || dim == 0 {
            return Err(Error::InvalidCoarseGraining(format!("volumes sum to {total}, dimension is {dim}")));
        }
        let mut start = 0;
        let blocks = volumes
            .iter()
            .map(|&len| {
                let b = Block { start, len };
                start += len;
                b
            })
            .collect();
        Ok(Self { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn volumes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::volume).collect()
    }

    /// True when every block of `self` is a union of blocks of `finer`.
    pub fn is_rougher_than(&self, finer: &CoarseGraining) -> bool {
        if self.dim != finer.dim {
            return false;
        }
        let boundaries: std::collections::HashSet<usize> = finer.blocks.iter().map(Block::end).collect();
        self.blocks.iter().all(|b| boundaries.contains(&b.end()))
    }

    /// Macrostate probabilities `p_i = sum_{q in block i} w_q` for diagonal weights `w`.
    pub fn block_sums(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: weights.len() });
        }
        Ok(self.blocks.iter().map(|b| weights[b.start..b.end()].iter().sum()).collect())
    }

    /// Dense projector onto block `i`. Test oracles only; the hot path never
    /// materialises these.
    pub fn projector(&self, i: usize) -> ComplexMatrix {
        let b = self.blocks[i];
        let diag: Vec<f64> = (0..self.dim).map(|q| if (b.start..b.end()).contains(&q) { 1.0 } else { 0.0 }).collect();
        ComplexMatrix::from_real_diagonal(&diag)
    }
}

/// `d / mu` blocks of size `mu`.
pub fn uniform_partition(dim: usize, mu: usize) -> Result<CoarseGraining> {
    if mu == 0 || mu > dim || !dim.is_multiple_of(mu) {
        return Err(Error::IndivisibleBlock { len: dim, block: mu });
    }
    CoarseGraining::from_volumes(dim, &vec![mu; dim / mu])
}

/// Blocks of two over one half of the basis and blocks of four over the
/// other half. Needs `d` divisible by 8.
pub fn half_half_partition(dim: usize, order: HalfHalfOrder) -> Result<CoarseGraining> {
    if dim == 0 || !dim.is_multiple_of(8) {
        return Err(Error::IndivisibleBlock { len: dim, block: 8 });
    }
    let half = dim / 2;
    let fine = vec![2; half / 2];
    let coarse = vec![4; half / 4];
    let volumes = match order {
        HalfHalfOrder::FineFirst => [fine, coarse].concat(),
        HalfHalfOrder::CoarseFirst => [coarse, fine].concat(),
    };
    CoarseGraining::from_volumes(dim, &volumes)
}

/// Blocks of `mu`, with any remainder `d mod mu` merged into the last block.
/// Used where `d` is too small or odd for the other constructions.
pub fn uniform_with_remainder(dim: usize, mu: usize) -> Result<CoarseGraining> {
    if mu == 0 || mu > dim {
        return Err(Error::IndivisibleBlock { len: dim, block: mu });
    }
    let mut volumes = vec![mu; dim / mu];
    if let Some(last) = volumes.last_mut() {
        *last += dim % mu;
    }
    CoarseGraining::from_volumes(dim, &volumes)
}

/// Splits every block into `factor` equal contiguous pieces.
pub fn refine(cg: &CoarseGraining, factor: usize) -> Result<CoarseGraining> {
    if factor == 0 {
        return Err(Error::IndivisibleBlock { len: cg.dim, block: 0 });
    }
    if let Some(b) = cg.blocks.iter().find(|b| b.len % factor != 0) {
        return Err(Error::IndivisibleBlock { len: b.len, block: factor });
    }
    let volumes: Vec<usize> = cg
        .blocks
        .iter()
        .flat_map(|b| std::iter::repeat_n(b.len / factor, factor))
        .collect();
    CoarseGraining::from_volumes(cg.dim, &volumes)
}

/// Observational entropy and its Shannon/Boltzmann split, in nats.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OEResult {
    pub total: f64,
    pub shannon: f64,
    pub boltzmann: f64,
    pub probs: Vec<f64>,
}

const PROB_SUM_TOL: f64 = 1e-8;

/// `-sum_i p_i ln(p_i / V_i)` from macrostate probabilities.
pub fn oe_from_probs(cg: &CoarseGraining, probs: Vec<f64>) -> OEResult {
    debug_assert_eq!(probs.len(), cg.len());
    let mut shannon = 0.0;
    let mut boltzmann = 0.0;
    for (&p, b) in probs.iter().zip(&cg.blocks) {
        if p > 0.0 {
            shannon -= p * p.ln();
            boltzmann += p * (b.len as f64).ln();
        }
    }
    OEResult { total: shannon + boltzmann, shannon, boltzmann, probs }
}

pub fn observational_entropy(psi: &StateVector, cg: &CoarseGraining) -> Result<OEResult> {
    let probs = cg.block_sums(&psi.probabilities())?;
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::Domain(format!("state norm^2 = {sum}")));
    }
    Ok(oe_from_probs(cg, probs))
}

/// Total OE straight from raw amplitudes, bitwise equal to
/// [`observational_entropy`]`.total`; caller guarantees unit norm.
pub(crate) fn oe_total_raw(amps: &[crate::linalg::C64], cg: &CoarseGraining) -> f64 {
    let mut shannon = 0.0;
    let mut boltzmann = 0.0;
    for b in &cg.blocks {
        let p: f64 = amps[b.start..b.end()].iter().map(|a| a.norm_sqr()).sum();
        if p > 0.0 {
            shannon -= p * p.ln();
            boltzmann += p * (b.len as f64).ln();
        }
    }
    shannon + boltzmann
}

fn density_probs(rho: &ComplexMatrix, cg: &CoarseGraining) -> Result<Vec<f64>> {
    if rho.dim() != cg.dim {
        return Err(Error::DimensionMismatch { expected: cg.dim, found: rho.dim() });
    }
    density_spectrum(rho)?;
    let diag: Vec<f64> = rho.diagonal().iter().map(|v| v.re).collect();
    cg.block_sums(&diag)
}

pub fn observational_entropy_mixed(rho: &ComplexMatrix, cg: &CoarseGraining) -> Result<OEResult> {
    let probs = density_probs(rho, cg)?;
    Ok(oe_from_probs(cg, probs))
}

/// `sum_j (p_j / V_j) Pi_j`, returned as a dense diagonal matrix.
pub fn retrodicted_from_probs(cg: &CoarseGraining, probs: &[f64]) -> ComplexMatrix {
    let mut diag = vec![0.0; cg.dim];
    for (b, &p) in cg.blocks.iter().zip(probs) {
        let w = p / b.len as f64;
        diag[b.start..b.end()].iter_mut().for_each(|x| *x = w);
    }
    ComplexMatrix::from_real_diagonal(&diag)
}

pub fn retrodicted_state(psi: &StateVector, cg: &CoarseGraining) -> Result<ComplexMatrix> {
    let oe = observational_entropy(psi, cg)?;
    Ok(retrodicted_from_probs(cg, &oe.probs))
}

pub fn retrodicted_state_mixed(rho: &ComplexMatrix, cg: &CoarseGraining) -> Result<ComplexMatrix> {
    let probs = density_probs(rho, cg)?;
    Ok(retrodicted_from_probs(cg, &probs))
}

/// Weight below which a probability or eigenvalue counts as zero for support checks.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Classical relative entropy `sum p_i ln(p_i / q_i)`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let mut acc = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < 0.0 || qi < 0.0 {
            return Err(Error::Domain(format!("negative probability at index {i}")));
        }
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::SupportMismatch(format!("q vanishes where p = {pi} (index {i})")));
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc)
}

/// Umegaki relative entropy `Tr rho (ln rho - ln sigma)`.
pub fn umegaki_relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let neg_entropy = -von_neumann_entropy(rho)?;
    density_spectrum(sigma)?;
    let (mu, v) = sigma.hermitian_eigen()?;
    let n = rho.dim();
    let mut cross = 0.0;
    for (k, &mu_k) in mu.iter().enumerate() {
        // <v_k| rho |v_k>
        let col: Vec<_> = (0..n).map(|r| v.get(r, k)).collect();
        let weight: f64 = col
            .iter()
            .zip(rho.apply(&col))
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        if mu_k <= SUPPORT_TOL {
            if weight > 1e-10 {
                return Err(Error::SupportMismatch(format!(
                    "rho has weight {weight:.3e} outside the support of sigma"
                )));
            }
            continue;
        }
        cross += weight * mu_k.ln();
    }
    Ok(neg_entropy - cross)
}

/// `(S_chi - S_vN, D_KL(P_p || P_r), D(rho || rho_rec))` for a pure state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RetrodictionCheck {
    pub lhs: f64,
    pub kl: f64,
    pub umegaki: f64,
}

impl RetrodictionCheck {
    /// Equality of the first two and the bound on the third, within `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        (self.lhs - self.kl).abs() <= tol && self.lhs >= self.umegaki - tol
    }
}

/// Joint predictive and retrodictive distributions over
/// `(macrostate i, eigenvector k)` for a pure state.
///
/// Only `k = 0` (the state itself) carries predictive weight; the remaining
/// eigenvectors are lumped per macrostate, using
/// `sum_{k>=1} <phi_k|Pi_i|phi_k> = V_i - <psi|Pi_i|psi>`.
pub fn joint_distributions(psi: &StateVector, cg: &CoarseGraining) -> Result<(Vec<f64>, Vec<f64>)> {
    let oe = observational_entropy(psi, cg)?;
    let n = cg.len();
    let mut predictive = vec![0.0; 2 * n];
    let mut retrodictive = vec![0.0; 2 * n];
    for (i, (b, &p)) in cg.blocks.iter().zip(&oe.probs).enumerate() {
        let v = b.len as f64;
        predictive[i] = p;
        retrodictive[i] = p * p / v;
        retrodictive[n + i] = p * (v - p) / v;
    }
    Ok((predictive, retrodictive))
}

pub fn prediction_retrodiction_check(psi: &StateVector, cg: &CoarseGraining) -> Result<RetrodictionCheck> {
    let rho = psi.projector();
    let lhs = observational_entropy(psi, cg)?.total - von_neumann_entropy(&rho)?;
    let (predictive, retrodictive) = joint_distributions(psi, cg)?;
    let kl = kl_divergence(&predictive, &retrodictive)?;
    let rec = retrodicted_state(psi, cg)?;
    let umegaki = umegaki_relative_entropy(&rho, &rec)?;
    Ok(RetrodictionCheck { lhs, kl, umegaki })
}
