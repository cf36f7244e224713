//! Periodic `n^3` grids, 16-spinor and scalar fields, FFT-based Fourier
//! multipliers and real-space multiplication by `|r|^-kappa`.
//!
//! Fourier convention is `e^(-2 pi i r.p)`: the lattice frequency of FFT
//! index `m` is `xi = k / L` with `k = m` for `m < n/2` and `k = m - n`
//! otherwise. The operator `-i grad` has symbol `2 pi xi`. Grid point `j`
//! sits at `(j - n/2) h`, so the origin is index `n/2` on each axis.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::clifford::{m_minus_dot, CMatrix16, CVector16, C64};
use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, pairwise_sum_c};
use crate::quadrature::origin_cell_average;
use crate::symbols::{a0_pinv, a0_symbol, projector_symbols, tau_symbol, MomentumVec};

pub const COMPONENTS: usize = 16;

/// Order of the product Gauss-Legendre rule used for the origin cell.
pub const ORIGIN_CELL_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    #[serde(rename = "box")]
    box_len: f64,
}

impl GridSpec {
    pub fn new(n: usize, box_len: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two >= 4")));
        }
        if !(box_len.is_finite() && box_len > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {box_len} must be positive")));
        }
        Ok(GridSpec { n, box_len })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn h(&self) -> f64 {
        self.box_len / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3)
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn spinor_dim(&self) -> usize {
        COMPONENTS * self.points()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    pub fn origin_index(&self) -> usize {
        let c = self.n / 2;
        self.index(c, c, c)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let h = self.h();
        let half = (self.n / 2) as f64;
        self.coords(idx).map(|c| (c as f64 - half) * h)
    }

    /// Signed integer frequency of FFT index `m`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        self.coords(idx).map(|m| self.wavenumber(m))
    }

    /// Lattice frequency `k / L`.
    pub fn frequency(&self, idx: usize) -> MomentumVec {
        MomentumVec(self.wavevector(idx).map(|k| k as f64 / self.box_len))
    }

    /// Physical momentum `2 pi k / L`, the symbol of `-i grad`.
    pub fn momentum(&self, idx: usize) -> MomentumVec {
        self.frequency(idx).scaled(2.0 * PI)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "n = {}, L = {} vs n = {}, L = {}",
                self.n, self.box_len, other.n, other.box_len
            )))
        }
    }
}

type Plan = Arc<dyn Fft<f64>>;

fn plans(n: usize) -> (Plan, Plan) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// In-place 3D DFT of an `n^3` block. The inverse includes the `1/n^3` factor.
pub fn fft3(data: &mut [C64], n: usize, inverse: bool) {
    assert_eq!(data.len(), n * n * n, "fft3 block size");
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    // Last axis is contiguous.
    plan.process(data);
    let mut lines = vec![C64::default(); data.len()];
    for stride in [n, n * n] {
        // Gather lines along the axis with this stride, transform, scatter.
        let outer = data.len() / (n * stride);
        let mut l = 0;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for t in 0..n {
                    lines[l * n + t] = data[base + t * stride];
                }
                l += 1;
            }
        }
        plan.process(&mut lines);
        let mut l = 0;
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for t in 0..n {
                    data[base + t * stride] = lines[l * n + t];
                }
                l += 1;
            }
        }
    }
    if inverse {
        let scale = 1.0 / (n * n * n) as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Single-component complex field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub data: Vec<C64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField { grid, data: vec![C64::default(); grid.points()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> C64 + Sync) -> Self {
        let data = (0..grid.points()).into_par_iter().map(|i| f(grid.position(i))).collect();
        ScalarField { grid, data }
    }

    pub fn from_real(grid: GridSpec, f: impl Fn([f64; 3]) -> f64 + Sync) -> Self {
        Self::from_fn(grid, |r| C64::from(f(r)))
    }

    /// Isotropic Gaussian `exp(-|r - c|^2 / (2 sigma^2))`.
    pub fn gaussian(grid: GridSpec, center: [f64; 3], sigma: f64) -> Self {
        Self::from_real(grid, |r| {
            let d2: f64 = (0..3).map(|a| (r[a] - center[a]).powi(2)).sum();
            (-d2 / (2.0 * sigma * sigma)).exp()
        })
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|z| z.norm_sqr()).collect();
        (self.grid.cell_volume() * pairwise_sum(&sq)).sqrt()
    }

    pub fn inner(&self, other: &ScalarField) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let prods: Vec<C64> = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).collect();
        Ok(pairwise_sum_c(&prods) * self.grid.cell_volume())
    }

    pub fn mean(&self) -> C64 {
        pairwise_sum_c(&self.data) / self.grid.points() as f64
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &ScalarField, f: impl Fn(C64, C64) -> C64) -> Result<ScalarField> {
        self.grid.ensure_same(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(ScalarField { grid: self.grid, data })
    }

    pub fn scaled(&self, s: C64) -> ScalarField {
        ScalarField { grid: self.grid, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn map_real(&self, w: &[f64]) -> ScalarField {
        assert_eq!(w.len(), self.data.len());
        ScalarField { grid: self.grid, data: self.data.iter().zip(w).map(|(z, w)| z * w).collect() }
    }

    pub fn spectrum(&self) -> Vec<C64> {
        let mut d = self.data.clone();
        fft3(&mut d, self.grid.n(), false);
        d
    }

    pub fn from_spectrum(grid: GridSpec, mut spec: Vec<C64>) -> Self {
        fft3(&mut spec, grid.n(), true);
        ScalarField { grid, data: spec }
    }

    /// Largest modulus on the six boundary faces of the box.
    pub fn boundary_max(&self) -> f64 {
        let n = self.grid.n();
        let mut m: f64 = 0.0;
        for (idx, z) in self.data.iter().enumerate() {
            let c = self.grid.coords(idx);
            if c.iter().any(|&x| x == 0 || x == n - 1) {
                m = m.max(z.norm());
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// 16-component field, component-major: entry `(c, idx)` is `data[c n^3 + idx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: GridSpec,
    pub data: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpinorField { grid, data: vec![C64::default(); grid.spinor_dim()] }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 3]) -> CVector16 + Sync) -> Self {
        let vals: Vec<CVector16> = (0..grid.points()).into_par_iter().map(|i| f(grid.position(i))).collect();
        Self::from_points(grid, &vals)
    }

    /// `spinor (x) profile`.
    pub fn from_profile(spinor: &CVector16, profile: &ScalarField) -> Self {
        let grid = profile.grid;
        let np = grid.points();
        let mut data = vec![C64::default(); grid.spinor_dim()];
        for c in 0..COMPONENTS {
            let s = spinor[c];
            if s != C64::default() {
                for (d, p) in data[c * np..(c + 1) * np].iter_mut().zip(&profile.data) {
                    *d = s * p;
                }
            }
        }
        SpinorField { grid, data }
    }

    fn from_points(grid: GridSpec, vals: &[CVector16]) -> Self {
        let np = grid.points();
        let mut data = vec![C64::default(); grid.spinor_dim()];
        for (idx, v) in vals.iter().enumerate() {
            for c in 0..COMPONENTS {
                data[c * np + idx] = v[c];
            }
        }
        SpinorField { grid, data }
    }

    pub fn component(&self, c: usize) -> &[C64] {
        let np = self.grid.points();
        &self.data[c * np..(c + 1) * np]
    }

    pub fn at(&self, idx: usize) -> CVector16 {
        let np = self.grid.points();
        CVector16::from_fn(|c, _| self.data[c * np + idx])
    }

    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.data.iter().map(|z| z.norm_sqr()).collect();
        (self.grid.cell_volume() * pairwise_sum(&sq)).sqrt()
    }

    pub fn inner(&self, other: &SpinorField) -> Result<C64> {
        self.grid.ensure_same(&other.grid)?;
        let prods: Vec<C64> = self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).collect();
        Ok(pairwise_sum_c(&prods) * self.grid.cell_volume())
    }

    pub fn sub(&self, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &SpinorField) -> Result<SpinorField> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &SpinorField, f: impl Fn(C64, C64) -> C64) -> Result<SpinorField> {
        self.grid.ensure_same(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(SpinorField { grid: self.grid, data })
    }

    pub fn scaled(&self, s: C64) -> SpinorField {
        SpinorField { grid: self.grid, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Pointwise product with a real weight `w(r)`.
    pub fn weighted(&self, w: &[f64]) -> SpinorField {
        let np = self.grid.points();
        assert_eq!(w.len(), np);
        let mut data = self.data.clone();
        data.par_chunks_mut(np).for_each(|comp| {
            for (z, w) in comp.iter_mut().zip(w) {
                *z *= *w;
            }
        });
        SpinorField { grid: self.grid, data }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Component-wise forward DFT (unnormalized), same layout.
    pub fn spectrum(&self) -> Vec<C64> {
        let n = self.grid.n();
        let mut d = self.data.clone();
        d.par_chunks_mut(self.grid.points()).for_each(|c| fft3(c, n, false));
        d
    }

    pub fn from_spectrum(grid: GridSpec, mut spec: Vec<C64>) -> Self {
        let n = grid.n();
        spec.par_chunks_mut(grid.points()).for_each(|c| fft3(c, n, true));
        SpinorField { grid, data: spec }
    }
}

/// Symbol argument is always the lattice frequency `xi = k / L`.
pub type ScalarSymbol = Arc<dyn Fn(&MomentumVec) -> C64 + Send + Sync>;
pub type MatrixSymbol = Arc<dyn Fn(&MomentumVec) -> CMatrix16 + Send + Sync>;

#[derive(Clone)]
pub enum Symbol {
    Scalar(ScalarSymbol),
    Matrix(MatrixSymbol),
}

/// A Fourier multiplier. Symbols receive the lattice frequency `xi`; those
/// of differential operators evaluate at `2 pi xi` internally.
#[derive(Clone)]
pub struct Multiplier {
    pub label: String,
    pub symbol: Symbol,
    pub self_adjoint: bool,
}

impl std::fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Multiplier")
            .field("label", &self.label)
            .field("self_adjoint", &self.self_adjoint)
            .finish()
    }
}

fn phys(xi: &MomentumVec) -> MomentumVec {
    xi.scaled(2.0 * PI)
}

impl Multiplier {
    pub fn scalar(label: &str, self_adjoint: bool, f: impl Fn(&MomentumVec) -> C64 + Send + Sync + 'static) -> Self {
        Multiplier { label: label.into(), symbol: Symbol::Scalar(Arc::new(f)), self_adjoint }
    }

    pub fn matrix(
        label: &str,
        self_adjoint: bool,
        f: impl Fn(&MomentumVec) -> CMatrix16 + Send + Sync + 'static,
    ) -> Self {
        Multiplier { label: label.into(), symbol: Symbol::Matrix(Arc::new(f)), self_adjoint }
    }

    pub fn identity() -> Self {
        Self::scalar("identity", true, |_| C64::from(1.0))
    }

    pub fn tau() -> Self {
        Self::matrix("tau", true, tau_symbol)
    }

    pub fn p_plus() -> Self {
        Self::matrix("P+", true, |xi| projector_symbols(xi).0)
    }

    pub fn p_minus() -> Self {
        Self::matrix("P-", true, |xi| projector_symbols(xi).1)
    }

    /// `M-.p^` with `p^ = -i grad`.
    pub fn m_minus_dot_p() -> Self {
        Self::matrix("M-.p", true, |xi| m_minus_dot(&phys(xi).0))
    }

    pub fn a0() -> Self {
        Self::matrix("A0", true, |xi| a0_symbol(&phys(xi)))
    }

    pub fn a0_pinv() -> Self {
        Self::matrix("A0^+", true, |xi| a0_pinv(&phys(xi)))
    }

    /// `(p^2 + 1)^s`.
    pub fn sobolev(s: f64) -> Self {
        Self::scalar("(p^2+1)^s", true, move |xi| C64::from((phys(xi).norm_sq() + 1.0).powf(s)))
    }

    /// `-i d/dr_axis`, `axis` in 0..3.
    pub fn derivative(axis: usize) -> Self {
        assert!(axis < 3);
        Self::scalar("-i d", true, move |xi| C64::from(2.0 * PI * xi.0[axis]))
    }

    /// `xi_i xi_j / |xi|^2` (indices 0-based); `delta_ij / 3` at `xi = 0`.
    pub fn cz_transform(i: usize, j: usize) -> Self {
        assert!(i < 3 && j < 3);
        Self::scalar("xi_i xi_j / xi^2", true, move |xi| {
            let n2 = xi.norm_sq();
            if n2 == 0.0 {
                C64::from(if i == j { 1.0 / 3.0 } else { 0.0 })
            } else {
                C64::from(xi.0[i] * xi.0[j] / n2)
            }
        })
    }

    /// `|xi|^-alpha`, zero at `xi = 0`.
    pub fn riesz(alpha: f64) -> Self {
        Self::scalar("|xi|^-alpha", true, move |xi| {
            let n = xi.norm();
            C64::from(if n == 0.0 { 0.0 } else { n.powf(-alpha) })
        })
    }
}

/// `F^-1 [symbol . F f]`, exact on the lattice.
pub fn apply_multiplier(m: &Multiplier, f: &SpinorField) -> SpinorField {
    let grid = f.grid;
    let np = grid.points();
    let mut spec = f.spectrum();
    match &m.symbol {
        Symbol::Scalar(s) => {
            let vals: Vec<C64> = (0..np).into_par_iter().map(|i| s(&grid.frequency(i))).collect();
            spec.par_chunks_mut(np).for_each(|comp| {
                for (z, v) in comp.iter_mut().zip(&vals) {
                    *z *= v;
                }
            });
        }
        Symbol::Matrix(s) => {
            let spec_ref = &spec;
            let out: Vec<CVector16> = (0..np)
                .into_par_iter()
                .map(|i| {
                    let v = CVector16::from_fn(|c, _| spec_ref[c * np + i]);
                    s(&grid.frequency(i)) * v
                })
                .collect();
            for (i, v) in out.iter().enumerate() {
                for c in 0..COMPONENTS {
                    spec[c * np + i] = v[c];
                }
            }
        }
    }
    SpinorField::from_spectrum(grid, spec)
}

/// Scalar multiplier on a scalar field; matrix symbols are rejected.
pub fn apply_scalar_multiplier(m: &Multiplier, f: &ScalarField) -> ScalarField {
    let Symbol::Scalar(s) = &m.symbol else {
        panic!("matrix symbol applied to a scalar field");
    };
    let grid = f.grid;
    let mut spec = f.spectrum();
    spec.par_iter_mut().enumerate().for_each(|(i, z)| *z *= s(&grid.frequency(i)));
    ScalarField::from_spectrum(grid, spec)
}

/// `|r|^-s g(|r|)` on the grid, with the origin replaced by its cell average.
pub fn singular_weight(grid: &GridSpec, s: f64, g: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
    let origin = grid.origin_index();
    let avg = origin_cell_average(s, grid.h(), ORIGIN_CELL_ORDER, &g);
    (0..grid.points())
        .into_par_iter()
        .map(|i| {
            if i == origin {
                avg
            } else {
                let r = grid.position(i);
                let d = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
                d.powf(-s) * g(d)
            }
        })
        .collect()
}

/// Regularized `|r|^-kappa`.
pub fn coulomb_weight(grid: &GridSpec, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::OutOfRange { name: "kappa", value: kappa, range: "(0, 1]" });
    }
    Ok(singular_weight(grid, kappa, |_| 1.0))
}

/// `gamma w(r) f(r)` with `w` the regularized `|r|^-kappa`.
pub fn coulomb_multiply(kappa: f64, gamma: f64, f: &SpinorField) -> Result<SpinorField> {
    let w: Vec<f64> = coulomb_weight(&f.grid, kappa)?.iter().map(|w| gamma * w).collect();
    Ok(f.weighted(&w))
}

/// `1 - exp(-2^nidx pi |r|^2)` on the grid.
pub fn cutoff_weight(grid: &GridSpec, nidx: u32) -> Vec<f64> {
    let a = 2f64.powi(nidx as i32) * PI;
    (0..grid.points())
        .map(|i| {
            let r = grid.position(i);
            -(-a * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2])).exp_m1()
        })
        .collect()
}

/// `(1 - chi_n) f` with `chi_n(r) = exp(-2^n pi |r|^2)`.
pub fn gaussian_cutoff(nidx: u32, f: &SpinorField) -> Result<SpinorField> {
    if nidx < 1 {
        return Err(Error::OutOfRange { name: "nidx", value: nidx as f64, range: ">= 1" });
    }
    Ok(f.weighted(&cutoff_weight(&f.grid, nidx)))
}

pub fn norm(f: &SpinorField) -> f64 {
    f.norm()
}

pub fn inner(f: &SpinorField, g: &SpinorField) -> Result<C64> {
    f.inner(g)
}

/// Norm computed from the DFT image: `(h^3 / n^3 sum |F f|^2)^(1/2)`.
pub fn spectral_norm(f: &SpinorField) -> f64 {
    let sq: Vec<f64> = f.spectrum().iter().map(|z| z.norm_sqr()).collect();
    (f.grid.cell_volume() / f.grid.points() as f64 * pairwise_sum(&sq)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{kron_vec, CVector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> SpinorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..grid.spinor_dim())
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpinorField { grid, data }
    }

    fn g4() -> GridSpec {
        GridSpec::new(4, 3.0).unwrap()
    }

    fn g8() -> GridSpec {
        GridSpec::new(8, 5.0).unwrap()
    }

    fn rel_diff(a: &SpinorField, b: &SpinorField) -> f64 {
        a.sub(b).unwrap().norm() / b.norm().max(1e-300)
    }

    #[test]
    fn grid_validation_and_geometry() {
        assert!(GridSpec::new(6, 1.0).is_err());
        assert!(GridSpec::new(2, 1.0).is_err());
        assert!(GridSpec::new(8, 0.0).is_err());
        let g = GridSpec::new(8, 16.0).unwrap();
        assert_eq!(g.h(), 2.0);
        assert_eq!(g.position(g.origin_index()), [0.0; 3]);
        assert_eq!(g.wavenumber(3), 3);
        assert_eq!(g.wavenumber(4), -4);
        assert_eq!(g.wavenumber(7), -1);
        let idx = g.index(1, 7, 4);
        assert_eq!(g.coords(idx), [1, 7, 4]);
        assert_eq!(g.frequency(idx).0, [1.0 / 16.0, -1.0 / 16.0, -4.0 / 16.0]);
    }

    #[test]
    fn fft_roundtrip_identity() {
        let f = random_field(g8(), 1);
        let g = apply_multiplier(&Multiplier::identity(), &f);
        assert!(f.sub(&g).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn fft_matches_direct_dft() {
        let grid = g4();
        let n = 4;
        let f = random_field(grid, 2);
        let spec = f.spectrum();
        let comp = &f.data[..64];
        for kidx in 0..64 {
            let kc = grid.coords(kidx);
            let mut s = C64::default();
            for j in 0..64 {
                let jc = grid.coords(j);
                let phase: usize = (0..3).map(|a| kc[a] * jc[a]).sum();
                s += comp[j] * C64::from_polar(1.0, -2.0 * PI * phase as f64 / n as f64);
            }
            assert!((s - spec[kidx]).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_against_direct_dft() {
        // Direct DFT sum oracle at n = 4.
        let grid = g4();
        let f = random_field(grid, 3);
        let mut total = 0.0;
        for c in 0..16 {
            let comp = f.component(c);
            for kidx in 0..64 {
                let kc = grid.coords(kidx);
                let mut s = C64::default();
                for j in 0..64 {
                    let jc = grid.coords(j);
                    let phase: usize = (0..3).map(|a| kc[a] * jc[a]).sum();
                    s += comp[j] * C64::from_polar(1.0, -2.0 * PI * phase as f64 / 4.0);
                }
                total += s.norm_sqr();
            }
        }
        let direct = (grid.cell_volume() / 64.0 * total).sqrt();
        assert!((direct - f.norm()).abs() / f.norm() <= 1e-12);
        assert!((spectral_norm(&f) - f.norm()).abs() / f.norm() <= 1e-12);
    }

    #[test]
    fn norm_and_inner_basics() {
        let z = SpinorField::zeros(g4());
        assert_eq!(z.norm(), 0.0);
        let f = random_field(g4(), 4);
        let g = random_field(g4(), 5);
        let a = f.inner(&g).unwrap();
        let b = g.inner(&f).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
        assert!((f.inner(&f).unwrap().re - f.norm().powi(2)).abs() < 1e-12);
        assert!(f.inner(&SpinorField::zeros(g8())).is_err());
    }

    #[test]
    fn multiplier_calculus() {
        let f = random_field(g8(), 6);
        let t = Multiplier::cz_transform(0, 1);
        let twice = apply_multiplier(&t, &apply_multiplier(&t, &f));
        let sq = Multiplier::scalar("squared", true, |xi| {
            let n2 = xi.norm_sq();
            C64::from(if n2 == 0.0 { 0.0 } else { (xi.0[0] * xi.0[1] / n2).powi(2) })
        });
        let once = apply_multiplier(&sq, &f);
        assert!(twice.sub(&once).unwrap().max_abs() <= 1e-12);
        // Sum of T_ii is the identity.
        let sum = (0..3)
            .map(|i| apply_multiplier(&Multiplier::cz_transform(i, i), &f))
            .reduce(|a, b| a.add(&b).unwrap())
            .unwrap();
        assert!(sum.sub(&f).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn projector_operator_algebra() {
        let pp = Multiplier::p_plus();
        let pm = Multiplier::p_minus();
        for seed in 0..20 {
            let f = random_field(g4(), 100 + seed);
            let a = apply_multiplier(&pp, &f);
            let b = apply_multiplier(&pm, &f);
            assert!(apply_multiplier(&pp, &a).sub(&a).unwrap().max_abs() <= 1e-12);
            assert!(apply_multiplier(&pm, &b).sub(&b).unwrap().max_abs() <= 1e-12);
            assert!(apply_multiplier(&pp, &b).max_abs() <= 1e-12);
            assert!(a.add(&b).unwrap().sub(&f).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn kinetic_identity() {
        // |(-i grad) P+ f| = |M-.p f / 2|.
        let f = random_field(g8(), 7);
        let pf = apply_multiplier(&Multiplier::p_plus(), &f);
        let mut sq = 0.0;
        for a in 0..3 {
            sq += apply_multiplier(&Multiplier::derivative(a), &pf).norm().powi(2);
        }
        let lhs = sq.sqrt();
        let rhs = apply_multiplier(&Multiplier::m_minus_dot_p(), &f).norm() * 0.5;
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
    }

    #[test]
    fn hermiticity_of_operators() {
        let f = random_field(g4(), 8);
        let g = random_field(g4(), 9);
        let w = coulomb_weight(&g4(), 1.0).unwrap();
        let ops: Vec<Box<dyn Fn(&SpinorField) -> SpinorField>> = vec![
            Box::new(|x| apply_multiplier(&Multiplier::m_minus_dot_p(), x)),
            Box::new(|x| x.weighted(&w)),
            Box::new(|x| apply_multiplier(&Multiplier::a0(), x)),
        ];
        for op in &ops {
            let lhs = g.inner(&op(&f)).unwrap();
            let rhs = op(&g).inner(&f).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn a0_pinv_inverts_on_range() {
        let f = random_field(g4(), 10);
        let pf = apply_multiplier(&Multiplier::p_plus(), &f);
        let back = apply_multiplier(&Multiplier::a0_pinv(), &apply_multiplier(&Multiplier::a0(), &f));
        assert!(back.sub(&pf).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn nullspace_vector_is_annihilated() {
        let v = nullspace_spinor();
        let grid = GridSpec::new(16, 8.0).unwrap();
        let f = SpinorField::from_profile(&v, &ScalarField::gaussian(grid, [0.0; 3], 1.0));
        let g = apply_multiplier(&Multiplier::m_minus_dot_p(), &f);
        assert!(g.norm() <= 1e-10 * f.norm());
    }

    fn nullspace_spinor() -> CVector16 {
        let e = [0.0, -1.0, 0.0, -1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, -1.0, 0.0, -1.0, 0.0];
        CVector16::from_iterator(e.iter().map(|x| C64::from(*x)))
    }

    #[test]
    fn coulomb_basics() {
        let f = random_field(g4(), 11);
        assert_eq!(coulomb_multiply(1.0, 0.0, &f).unwrap().max_abs(), 0.0);
        let vf = coulomb_multiply(0.7, 1.0, &f).unwrap();
        let e = f.inner(&vf).unwrap();
        assert!(e.im.abs() <= 1e-12 * e.re && e.re >= 0.0);
        assert!(coulomb_multiply(1.5, 1.0, &f).is_err());
        let w = coulomb_weight(&g4(), 1.0).unwrap();
        // Away from the origin the weight is the point value.
        let idx = g4().index(0, 0, 0);
        let r = g4().position(idx);
        let d = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        assert_eq!(w[idx], 1.0 / d);
        assert!(w[g4().origin_index()] > 1.0 / (g4().h() * 0.5 * 3f64.sqrt()));
    }

    #[test]
    fn cutoff_behaviour() {
        let grid = GridSpec::new(32, 8.0).unwrap();
        let v = kron_vec(&CVector4::new(C64::from(1.0), C64::default(), C64::default(), C64::default()), &CVector4::repeat(C64::from(0.5)));
        let f = SpinorField::from_profile(&v, &ScalarField::gaussian(grid, [0.0; 3], 1.0));
        let w = cutoff_weight(&grid, 3);
        assert_eq!(w[grid.origin_index()], 0.0);
        assert!(gaussian_cutoff(0, &f).is_err());
        let mut prev = f64::INFINITY;
        for n in 1..=8 {
            // Plateaus once chi_n is narrower than the grid spacing.
            let d = f.sub(&gaussian_cutoff(n, &f).unwrap()).unwrap().norm();
            assert!(d <= prev);
            prev = d;
        }
    }

    #[test]
    fn cutoff_remainder_under_root_potential() {
        let grid = GridSpec::new(32, 4.0).unwrap();
        let v = nullspace_spinor() + CVector16::from_fn(|i, _| C64::new(0.1 * i as f64, 0.0));
        let raw = SpinorField::from_profile(&v, &ScalarField::gaussian(grid, [0.0; 3], 1.0));
        let f = apply_multiplier(&Multiplier::p_minus(), &raw);
        let root: Vec<f64> = coulomb_weight(&grid, 1.0).unwrap().iter().map(|w| w.sqrt()).collect();
        let norms: Vec<f64> = (1..=8)
            .map(|n| {
                let rest = f.sub(&gaussian_cutoff(n, &f).unwrap()).unwrap();
                apply_multiplier(&Multiplier::p_minus(), &rest).weighted(&root).norm()
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[1] <= 1.05 * w[0], "{norms:?}");
        }
        assert!(norms[7] < 0.5 * norms[0], "{norms:?}");
    }

    #[test]
    fn multipliers_commute_and_are_linear() {
        let f = random_field(g4(), 12);
        let g = random_field(g4(), 13);
        let (a, b) = (Multiplier::tau(), Multiplier::sobolev(0.5));
        let ab = apply_multiplier(&a, &apply_multiplier(&b, &f));
        let ba = apply_multiplier(&b, &apply_multiplier(&a, &f));
        assert!(ab.sub(&ba).unwrap().max_abs() <= 1e-12);
        let lin = apply_multiplier(&a, &f.add(&g.scaled(C64::new(0.5, -2.0))).unwrap());
        let sep = apply_multiplier(&a, &f).add(&apply_multiplier(&a, &g).scaled(C64::new(0.5, -2.0))).unwrap();
        assert!(rel_diff(&lin, &sep) <= 1e-12);
    }
}
