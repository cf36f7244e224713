//! Dense plane-wave assembly of `H^rel = M-.p + gamma V`, its block form on
//! `ran P+ (+) ran P-`, the extension `H^rel_F`, and fiber operators.
//!
//! Basis: plane wave `k` (grid index order) times spinor index, flattened as
//! `16 k + s`. The map from grid fields is the unitary
//! `c = FFT(f) (h^3 / n^3)^(1/2)`. Multiplication by a real weight `w`
//! becomes the circulant `w^(k - k') / n^3` on every spinor component.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::clifford::{clifford, m_minus_dot, m_plus_dot, CMatrix16, C64};
use crate::coupling::{require_admissible, CouplingReport};
use crate::error::{Error, Result};
use crate::grid::{coulomb_weight, fft3, GridSpec, SpinorField};
use crate::linalg::{hermitian_norm, matmul, CMatrix};
use crate::schur::{frobenius_schur, BlockOperator, FactoredOperator};
use crate::symbols::{diagonalizer, projector_symbols, MomentumVec};

/// Largest dense dimension `16 n^3` accepted.
pub const DENSE_CAP: usize = 10_000;

/// Shift used when `A` is too ill-conditioned at `mu = 0`.
pub const FALLBACK_MU: C64 = C64::new(0.0, 0.1);

pub fn check_size(grid: &GridSpec) -> Result<usize> {
    let dim = grid.spinor_dim();
    if dim > DENSE_CAP {
        Err(Error::SizeCap { dim, cap: DENSE_CAP })
    } else {
        Ok(dim)
    }
}

pub fn to_plane_waves(f: &SpinorField) -> DVector<C64> {
    let grid = f.grid;
    let np = grid.points();
    let spec = f.spectrum();
    let scale = (grid.cell_volume() / np as f64).sqrt();
    DVector::from_fn(16 * np, |i, _| spec[(i % 16) * np + i / 16] * scale)
}

pub fn from_plane_waves(grid: GridSpec, c: &DVector<C64>) -> Result<SpinorField> {
    let np = grid.points();
    if c.len() != 16 * np {
        return Err(Error::DimensionMismatch { expected: (16 * np).to_string(), found: c.len().to_string() });
    }
    let scale = (np as f64 / grid.cell_volume()).sqrt();
    let mut spec = vec![C64::default(); 16 * np];
    for (i, z) in c.iter().enumerate() {
        spec[(i % 16) * np + i / 16] = z * scale;
    }
    Ok(SpinorField::from_spectrum(grid, spec))
}

/// `(k - k') mod n` as a grid index.
fn difference_index(grid: &GridSpec, k: usize, kp: usize) -> usize {
    let n = grid.n();
    let a = grid.coords(k);
    let b = grid.coords(kp);
    grid.index((a[0] + n - b[0]) % n, (a[1] + n - b[1]) % n, (a[2] + n - b[2]) % n)
}

/// `FFT(w) / n^3`: circulant entries of multiplication by `w`.
pub fn weight_spectrum(grid: &GridSpec, w: &[f64]) -> Vec<C64> {
    let mut s: Vec<C64> = w.iter().map(|v| C64::from(*v)).collect();
    fft3(&mut s, grid.n(), false);
    let np = grid.points() as f64;
    s.iter().map(|z| z / np).collect()
}

/// Multiplication by the real weight `w` on all 16 components.
pub fn potential_matrix(grid: &GridSpec, w: &[f64]) -> Result<CMatrix> {
    let dim = check_size(grid)?;
    let ws = weight_spectrum(grid, w);
    let np = grid.points();
    let cols: Vec<Vec<(usize, C64)>> = (0..np)
        .into_par_iter()
        .map(|kp| (0..np).map(|k| (k, ws[difference_index(grid, k, kp)])).collect())
        .collect();
    let mut m = CMatrix::zeros(dim, dim);
    for (kp, col) in cols.iter().enumerate() {
        for &(k, v) in col {
            for s in 0..16 {
                m[(16 * k + s, 16 * kp + s)] = v;
            }
        }
    }
    Ok(m)
}

/// Block diagonal matrix with `f(q_k)` on the diagonal, `q_k = 2 pi k / L`.
pub fn symbol_matrix(grid: &GridSpec, f: impl Fn(&MomentumVec) -> CMatrix16 + Sync) -> Result<CMatrix> {
    let dim = check_size(grid)?;
    let blocks: Vec<CMatrix16> = (0..grid.points()).into_par_iter().map(|k| f(&grid.momentum(k))).collect();
    let mut m = CMatrix::zeros(dim, dim);
    for (k, b) in blocks.iter().enumerate() {
        m.view_mut((16 * k, 16 * k), (16, 16)).copy_from(b);
    }
    Ok(m)
}

/// Discrete `M-.p^`.
pub fn free_matrix(grid: &GridSpec) -> Result<CMatrix> {
    symbol_matrix(grid, |q| m_minus_dot(&q.0))
}

/// `P+ B P+` per momentum.
pub fn mass_block_matrix(grid: &GridSpec) -> Result<CMatrix> {
    let b = clifford().b;
    symbol_matrix(grid, |q| {
        let (pp, _) = projector_symbols(q);
        pp * b * pp
    })
}

fn coulomb(grid: &GridSpec, kappa: f64) -> Result<Vec<f64>> {
    coulomb_weight(grid, kappa)
}

/// `H^rel = M-.p^ + gamma V`, `V` the regularized `|r|^-kappa`.
pub fn assemble_hrel(grid: &GridSpec, gamma: f64, kappa: f64) -> Result<CMatrix> {
    check_size(grid)?;
    let w = coulomb(grid, kappa)?;
    let mut h = free_matrix(grid)?;
    if gamma != 0.0 {
        h += potential_matrix(grid, &w)? * C64::from(gamma);
    }
    Ok(h)
}

/// `{+-2|q_k| x4, 0 x8}` over the momentum lattice: the `gamma = 0` spectrum.
pub fn free_spectrum(grid: &GridSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.spinor_dim());
    for k in 0..grid.points() {
        let q = grid.momentum(k).norm();
        out.extend([-2.0 * q; 4]);
        out.extend([2.0 * q; 4]);
        out.extend([0.0; 8]);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// `blockdiag(u_k) m`.
fn left_blocks(blocks: &[CMatrix16], m: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, u) in blocks.iter().enumerate() {
        let rows = m.rows(16 * k, 16);
        out.rows_mut(16 * k, 16).copy_from(&(u * rows));
    }
    out
}

/// `blockdiag(u_k) m blockdiag(u_k)^dagger`.
fn conjugate_blocks(blocks: &[CMatrix16], m: &CMatrix) -> CMatrix {
    let um = left_blocks(blocks, m);
    left_blocks(blocks, &um.adjoint()).adjoint()
}

/// Row `16 k + s` of the rotated basis goes to position `8 k + s` (plus,
/// `s < 8`) or `8 n^3 + 8 k + s - 8` (minus).
fn split_position(np: usize, i: usize) -> usize {
    let (k, s) = (i / 16, i % 16);
    if s < 8 {
        8 * k + s
    } else {
        8 * np + 8 * k + s - 8
    }
}

fn permute(m: &CMatrix, np: usize, forward: bool) -> CMatrix {
    let n = m.nrows();
    let pos: Vec<usize> = (0..n).map(|i| split_position(np, i)).collect();
    let mut out = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if forward {
                out[(pos[i], pos[j])] = m[(i, j)];
            } else {
                out[(i, j)] = m[(pos[i], pos[j])];
            }
        }
    }
    out
}

/// Per-momentum diagonalizers `u(q_k)`: rows 0..8 span `ran P+`, rows 8..16
/// span `ran P-`.
pub fn momentum_eigenbases(grid: &GridSpec) -> Vec<CMatrix16> {
    (0..grid.points()).into_par_iter().map(|k| diagonalizer(&grid.momentum(k))).collect()
}

/// Isometry onto `ran P+` or `ran P-` of the discrete projector, columns
/// ordered by momentum index, then spin.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub q: CMatrix,
    pub plus: bool,
}

impl SubspaceBasis {
    pub fn new(grid: &GridSpec, plus: bool) -> Result<Self> {
        let dim = check_size(grid)?;
        let np = grid.points();
        let us = momentum_eigenbases(grid);
        let off = if plus { 0 } else { 8 };
        let mut q = CMatrix::zeros(dim, 8 * np);
        for (k, u) in us.iter().enumerate() {
            for s in 0..8 {
                let col = u.row(off + s).adjoint();
                q.view_mut((16 * k, 8 * k + s), (16, 1)).copy_from(&col);
            }
        }
        Ok(SubspaceBasis { q, plus })
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }
}

/// `H^rel + P+ B P+` split along `ran P+ (+) ran P-`.
pub fn extension_blocks(grid: &GridSpec, gamma: f64, kappa: f64) -> Result<BlockOperator> {
    let h = assemble_hrel(grid, gamma, kappa)? + mass_block_matrix(grid)?;
    let us = momentum_eigenbases(grid);
    let rotated = permute(&conjugate_blocks(&us, &h), grid.points(), true);
    BlockOperator::from_dense(&rotated, 8 * grid.points())
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub blocks: BlockOperator,
    pub factors: FactoredOperator,
    /// Discrete `H^rel_F` in the plane-wave basis.
    pub matrix: CMatrix,
    pub coupling: CouplingReport,
}

/// `H^rel_F = R diag(A - mu, S) T + mu - P+ B P+`, mapped back to plane
/// waves. `mu` defaults to 0 and falls back to [`FALLBACK_MU`] when `A` is
/// ill-conditioned.
pub fn assemble_extension(grid: &GridSpec, gamma: f64, kappa: f64, mu: Option<C64>) -> Result<Extension> {
    let coupling = require_admissible(gamma, kappa)?;
    let blocks = extension_blocks(grid, gamma, kappa)?;
    let factors = match mu {
        Some(mu) => frobenius_schur(&blocks, mu)?,
        None => match frobenius_schur(&blocks, C64::default()) {
            Err(Error::SingularBlock { .. }) => frobenius_schur(&blocks, FALLBACK_MU)?,
            other => other?,
        },
    };
    let us = momentum_eigenbases(grid);
    let back = permute(&factors.reconstruct(), grid.points(), false);
    // blockdiag(u)^dagger X blockdiag(u)
    let us_adj: Vec<CMatrix16> = us.iter().map(|u| u.adjoint()).collect();
    let matrix = conjugate_blocks(&us_adj, &back) - mass_block_matrix(grid)?;
    Ok(Extension { blocks, factors, matrix, coupling })
}

/// `|V^(1/2) P+ A^-1 P+ V^(1/2)|` with `V^(1/2) = (|gamma| w)^(1/2)`.
pub fn schur_norm(grid: &GridSpec, gamma: f64, kappa: f64, blocks: &BlockOperator) -> Result<f64> {
    let w = coulomb(grid, kappa)?;
    let root: Vec<f64> = w.iter().map(|v| (gamma.abs() * v).sqrt()).collect();
    let s = potential_matrix(grid, &root)?;
    let plus = SubspaceBasis::new(grid, true)?;
    let k = matmul(&s, &plus.q);
    let x = blocks
        .a
        .clone()
        .lu()
        .solve(&k.adjoint())
        .ok_or(Error::SingularBlock { cond: f64::INFINITY })?;
    let m = matmul(&k, &x);
    Ok(hermitian_norm(&crate::linalg::hermitian_part(&m)))
}

/// `H_F(P) = P.M+ + hrel_f + m1 beta(x)1 + m2 1(x)beta + V_ext`.
pub fn fiber_operator(
    grid: &GridSpec,
    big_p: &MomentumVec,
    hrel_f: &CMatrix,
    m1: f64,
    m2: f64,
    vext: Option<&[f64]>,
) -> Result<CMatrix> {
    let dim = check_size(grid)?;
    if hrel_f.nrows() != dim || hrel_f.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: format!("{dim}x{dim}"),
            found: format!("{}x{}", hrel_f.nrows(), hrel_f.ncols()),
        });
    }
    let c = clifford();
    let spin = m_plus_dot(&big_p.0) + c.beta_1 * C64::from(m1) + c.one_beta * C64::from(m2);
    let mut h = hrel_f.clone() + symbol_matrix(grid, |_| spin)?;
    if let Some(v) = vext {
        if v.len() != grid.points() {
            return Err(Error::DimensionMismatch { expected: grid.points().to_string(), found: v.len().to_string() });
        }
        h += potential_matrix(grid, v)?;
    }
    Ok(h)
}

/// `gamma V f + M-.p^ f` computed on the grid, for cross-checks.
pub fn apply_hrel(f: &SpinorField, gamma: f64, kappa: f64) -> Result<SpinorField> {
    let free = crate::grid::apply_multiplier(&crate::grid::Multiplier::m_minus_dot_p(), f);
    free.add(&crate::grid::coulomb_multiply(kappa, gamma, f)?)
}

/// `(beta(x)beta) X` on every momentum: conjugation flips `P.M+` and keeps
/// `M-.p`, so it maps `H_F(P)` to `H_F(-P)` when `gamma = 0` and `m1 = m2 = 0`.
pub fn spin_parity(grid: &GridSpec) -> Result<CMatrix> {
    let c = clifford();
    let y = c.beta_beta * c.exchange;
    symbol_matrix(grid, |_| y)
}
