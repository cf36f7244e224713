//! Counterexamples and inequality checks: the `M-.p` nullspace profile that
//! defeats relative boundedness of `V`, the form-versus-operator comparison
//! of `H_DC` and `H+` on low-rank two-particle states, the modified triangle
//! inequality, and potential energies.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::{clifford, m_minus, CMatrix4, CVector16, CVector4, C64};
use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, apply_scalar_multiplier, coulomb_weight, singular_weight, GridSpec, Multiplier, ScalarField, SpinorField};
use crate::linalg::pairwise_sum;

/// `(0,-1,0,-1,1,0,1,0,0,1,0,1,-1,0,-1,0)`: annihilated by every `M-_k`.
pub const NULLSPACE_SPINOR: [f64; 16] = [0., -1., 0., -1., 1., 0., 1., 0., 0., 1., 0., 1., -1., 0., -1., 0.];

pub fn nullspace_spinor() -> CVector16 {
    CVector16::from_fn(|i, _| C64::from(NULLSPACE_SPINOR[i]))
}

/// `v e^{-|r|^2} |r|^{-(3/2 - delta)}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NullspaceProfile {
    pub delta: f64,
}

impl NullspaceProfile {
    pub fn new(delta: f64, kappa: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < kappa) {
            return Err(Error::OutOfRange { name: "delta", value: delta, range: "(0, kappa)" });
        }
        Ok(NullspaceProfile { delta })
    }

    /// Radial part on the grid, origin cell-averaged like `V`.
    pub fn profile(&self, grid: &GridSpec) -> ScalarField {
        let w = singular_weight(grid, 1.5 - self.delta, |r| (-r * r).exp());
        ScalarField { grid: *grid, data: w.into_iter().map(C64::from).collect() }
    }

    pub fn field(&self, grid: &GridSpec) -> SpinorField {
        SpinorField::from_profile(&nullspace_spinor(), &self.profile(grid))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NullspaceLevel {
    pub n: usize,
    pub h: f64,
    pub kernel_residual: f64,
    pub v_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullspaceReport {
    pub kappa: f64,
    pub delta: f64,
    pub box_len: f64,
    /// `max_k max_i |(M-_k v)_i|`.
    pub exact_residual: f64,
    pub levels: Vec<NullspaceLevel>,
    /// `|V f|` at `2n` over `|V f|` at `n`.
    pub growth: Vec<f64>,
    pub passed: bool,
}

pub const NULLSPACE_GROWTH_MIN: f64 = 1.5;

pub fn nullspace_check(kappa: f64, delta: f64, box_len: f64, ns: &[usize]) -> Result<NullspaceReport> {
    let prof = NullspaceProfile::new(delta, kappa)?;
    let v = nullspace_spinor();
    let mut exact: f64 = 0.0;
    for k in 1..=3 {
        let r = m_minus(k)? * v;
        exact = exact.max(r.iter().fold(0.0, |m, z| m.max(z.norm())));
    }
    let mut levels = Vec::new();
    for &n in ns {
        let grid = GridSpec::new(n, box_len)?;
        let f = prof.field(&grid);
        let kern = apply_multiplier(&Multiplier::m_minus_dot_p(), &f);
        let vf = f.weighted(&coulomb_weight(&grid, kappa)?);
        levels.push(NullspaceLevel { n, h: grid.h(), kernel_residual: kern.norm() / f.norm(), v_norm: vf.norm() });
    }
    let growth: Vec<f64> = levels.windows(2).map(|w| w[1].v_norm / w[0].v_norm).collect();
    let passed = exact <= 1e-14
        && levels.iter().all(|l| l.kernel_residual <= 1e-10)
        && growth.iter().all(|g| *g >= NULLSPACE_GROWTH_MIN);
    Ok(NullspaceReport { kappa, delta, box_len, exact_residual: exact, levels, growth, passed })
}

/// One-particle factor: a 4-spinor times a scalar profile.
#[derive(Debug, Clone)]
pub struct Factor {
    pub spinor: CVector4,
    pub profile: Arc<ScalarField>,
}

impl Factor {
    pub fn new(spinor: CVector4, profile: Arc<ScalarField>) -> Self {
        Factor { spinor, profile }
    }

    pub fn inner(&self, other: &Factor) -> Result<C64> {
        Ok(self.spinor.dotc(&other.spinor) * self.profile.inner(&other.profile)?)
    }

    fn key(&self) -> (usize, [u64; 8]) {
        let mut bits = [0u64; 8];
        for (i, z) in self.spinor.iter().enumerate() {
            bits[2 * i] = z.re.to_bits();
            bits[2 * i + 1] = z.im.to_bits();
        }
        (Arc::as_ptr(&self.profile) as usize, bits)
    }
}

#[derive(Debug, Clone)]
pub struct Term {
    pub left: Factor,
    pub right: Factor,
    pub coeff: C64,
}

/// Finite sum of `coeff (left)(x) (right)(y)`.
#[derive(Debug, Clone)]
pub struct ProductState {
    pub grid: GridSpec,
    pub terms: Vec<Term>,
}

/// `spin (x) symbol(p)` acting on one particle's spinor and one particle's
/// profile; `None` leaves that slot alone.
#[derive(Clone)]
pub struct LocalOp {
    pub left_spin: Option<CMatrix4>,
    pub left_symbol: Option<(usize, Multiplier)>,
    pub right_spin: Option<CMatrix4>,
    pub right_symbol: Option<(usize, Multiplier)>,
    pub coeff: C64,
}

impl ProductState {
    pub fn new(grid: GridSpec) -> Self {
        ProductState { grid, terms: Vec::new() }
    }

    pub fn push(&mut self, left: Factor, right: Factor, coeff: C64) -> Result<()> {
        self.grid.ensure_same(&left.profile.grid)?;
        self.grid.ensure_same(&right.profile.grid)?;
        self.terms.push(Term { left, right, coeff });
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn inner(&self, other: &ProductState) -> Result<C64> {
        let mut acc = Vec::with_capacity(self.terms.len() * other.terms.len());
        for s in &self.terms {
            for t in &other.terms {
                acc.push(s.coeff.conj() * t.coeff * s.left.inner(&t.left)? * s.right.inner(&t.right)?);
            }
        }
        Ok(crate::linalg::pairwise_sum_c(&acc))
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(self.inner(self)?.re.max(0.0).sqrt())
    }

    pub fn scaled(&self, s: C64) -> ProductState {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.coeff *= s);
        out
    }

    pub fn add(&self, other: &ProductState) -> Result<ProductState> {
        self.grid.ensure_same(&other.grid)?;
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out.merged())
    }

    pub fn sub(&self, other: &ProductState) -> Result<ProductState> {
        self.add(&other.scaled(C64::from(-1.0)))
    }

    /// Exchange of both particles: spinor and position together.
    pub fn exchange(&self) -> ProductState {
        let terms = self
            .terms
            .iter()
            .map(|t| Term { left: t.right.clone(), right: t.left.clone(), coeff: t.coeff })
            .collect();
        ProductState { grid: self.grid, terms }
    }

    /// `P_a = (1 - E) / 2`.
    pub fn antisymmetrized(&self) -> ProductState {
        let mut out = self.scaled(C64::from(0.5));
        out.terms.extend(self.exchange().scaled(C64::from(-0.5)).terms);
        out.merged()
    }

    /// `(1 + E) / 2`.
    pub fn symmetrized(&self) -> ProductState {
        let mut out = self.scaled(C64::from(0.5));
        out.terms.extend(self.exchange().scaled(C64::from(0.5)).terms);
        out.merged()
    }

    /// Combine terms whose factors share profile and spinor; drop zeros.
    pub fn merged(&self) -> ProductState {
        let mut order: Vec<((usize, [u64; 8]), (usize, [u64; 8]))> = Vec::new();
        let mut sums: HashMap<((usize, [u64; 8]), (usize, [u64; 8])), (Term, C64)> = HashMap::new();
        for t in &self.terms {
            let key = (t.left.key(), t.right.key());
            match sums.get_mut(&key) {
                Some((_, c)) => *c += t.coeff,
                None => {
                    order.push(key);
                    sums.insert(key, (t.clone(), t.coeff));
                }
            }
        }
        let terms = order
            .into_iter()
            .filter_map(|k| {
                let (mut t, c) = sums.remove(&k).expect("key recorded");
                t.coeff = c;
                (c != C64::default()).then_some(t)
            })
            .collect();
        ProductState { grid: self.grid, terms }
    }

    /// `sum_ops op psi`, derivatives of each profile computed once.
    pub fn apply(&self, ops: &[LocalOp]) -> ProductState {
        let mut cache: HashMap<(usize, usize), Arc<ScalarField>> = HashMap::new();
        let mut transformed = |f: &Arc<ScalarField>, sym: &Option<(usize, Multiplier)>| -> Arc<ScalarField> {
            match sym {
                None => f.clone(),
                Some((id, m)) => cache
                    .entry((Arc::as_ptr(f) as usize, *id))
                    .or_insert_with(|| Arc::new(apply_scalar_multiplier(m, f)))
                    .clone(),
            }
        };
        let mut out = ProductState::new(self.grid);
        for t in &self.terms {
            for op in ops {
                let ls = op.left_spin.map_or(t.left.spinor, |m| m * t.left.spinor);
                let rs = op.right_spin.map_or(t.right.spinor, |m| m * t.right.spinor);
                let lp = transformed(&t.left.profile, &op.left_symbol);
                let rp = transformed(&t.right.profile, &op.right_symbol);
                out.terms.push(Term { left: Factor::new(ls, lp), right: Factor::new(rs, rp), coeff: t.coeff * op.coeff });
            }
        }
        out.merged()
    }
}

fn derivative(axis: usize) -> Option<(usize, Multiplier)> {
    Some((axis, Multiplier::derivative(axis)))
}

/// Free massless `H_DC = alpha.p_x (x) 1 + 1 (x) alpha.p_y`.
pub fn h_dc_ops() -> Vec<LocalOp> {
    let a = clifford().alpha;
    let mut ops = Vec::new();
    for k in 0..3 {
        ops.push(LocalOp { left_spin: Some(a[k]), left_symbol: derivative(k), right_spin: None, right_symbol: None, coeff: C64::from(1.0) });
        ops.push(LocalOp { left_spin: None, left_symbol: None, right_spin: Some(a[k]), right_symbol: derivative(k), coeff: C64::from(1.0) });
    }
    ops
}

/// `H+ = 1 (x) alpha.(p_x + p_y)`.
pub fn h_plus_ops() -> Vec<LocalOp> {
    let a = clifford().alpha;
    let mut ops = Vec::new();
    for k in 0..3 {
        ops.push(LocalOp { left_spin: None, left_symbol: derivative(k), right_spin: Some(a[k]), right_symbol: None, coeff: C64::from(1.0) });
        ops.push(LocalOp { left_spin: None, left_symbol: None, right_spin: Some(a[k]), right_symbol: derivative(k), coeff: C64::from(1.0) });
    }
    ops
}

/// `H_DC - H+ = alpha.p_x (x) 1 - 1 (x) alpha.p_x`.
pub fn difference_ops() -> Vec<LocalOp> {
    let a = clifford().alpha;
    let mut ops = Vec::new();
    for k in 0..3 {
        ops.push(LocalOp { left_spin: Some(a[k]), left_symbol: derivative(k), right_spin: None, right_symbol: None, coeff: C64::from(1.0) });
        ops.push(LocalOp { left_spin: None, left_symbol: derivative(k), right_spin: Some(a[k]), right_symbol: None, coeff: C64::from(-1.0) });
    }
    ops
}

fn spinor(v: [f64; 4]) -> CVector4 {
    CVector4::from_fn(|i, _| C64::from(v[i]))
}

/// `(0,f,0,f)(x) (f,0,f,0) - (f,0,f,0)(x) (0,f,0,f)`.
pub fn okaji_state(profile: Arc<ScalarField>) -> Result<ProductState> {
    let a = Factor::new(spinor([0., 1., 0., 1.]), profile.clone());
    let b = Factor::new(spinor([1., 0., 1., 0.]), profile.clone());
    let mut psi = ProductState::new(profile.grid);
    psi.push(a.clone(), b.clone(), C64::from(1.0))?;
    psi.push(b, a, C64::from(-1.0))?;
    Ok(psi)
}

fn random_spinor(rng: &mut ChaCha8Rng) -> CVector4 {
    CVector4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_gaussian(grid: &GridSpec, rng: &mut ChaCha8Rng) -> Arc<ScalarField> {
    let c = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0));
    let sigma = rng.random_range(0.7..1.3);
    Arc::new(ScalarField::gaussian(*grid, c, sigma))
}

/// Seeded rank-1 Gaussian products with random polarizations.
pub fn random_product(grid: &GridSpec, rng: &mut ChaCha8Rng) -> Result<ProductState> {
    let mut s = ProductState::new(*grid);
    let l = Factor::new(random_spinor(rng), random_gaussian(grid, rng));
    let r = Factor::new(random_spinor(rng), random_gaussian(grid, rng));
    s.push(l, r, C64::from(1.0))?;
    Ok(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct OkajiReport {
    pub n: usize,
    pub box_len: f64,
    pub rank_psi: usize,
    pub psi_is_antisymmetric: f64,
    /// `|(H_DC - H+) psi| / |psi|`.
    pub operator_gap: f64,
    /// Same, from `H_DC psi - H+ psi` assembled separately.
    pub operator_gap_check: f64,
    /// `max_phi |<phi, (H_DC - H+) psi>| / (|phi| |psi|)`, antisymmetric phi.
    pub form_gap: f64,
    /// Same over symmetrized phi.
    pub form_gap_symmetric: f64,
    /// `|P_a (H_DC - H+) psi| / |psi|`: the largest value any antisymmetric
    /// phi can produce.
    pub antisymmetric_component: f64,
    /// `|P_s (H_DC - H+) psi| / |psi|`.
    pub symmetric_component: f64,
    pub samples: usize,
    pub operator_gap_min: f64,
    pub form_gap_max: f64,
    pub operator_gap_ok: bool,
    pub form_gap_ok: bool,
    pub separation_orders: f64,
    pub separation_ok: bool,
    pub symmetric_ok: bool,
}

pub const OPERATOR_GAP_MIN: f64 = 0.1;
pub const FORM_GAP_MAX: f64 = 1e-8;
pub const SYMMETRIC_GAP_MIN: f64 = 1e-3;
/// Required gap between operator and form values, in decades.
pub const SEPARATION_ORDERS: f64 = 6.0;
/// Largest boundary value accepted for profiles.
pub const BOUNDARY_TOL: f64 = 1e-10;

pub fn okaji_gap(profile: &ScalarField, samples: usize, seed: u64) -> Result<OkajiReport> {
    let boundary = profile.boundary_max() / profile.max_abs().max(f64::MIN_POSITIVE);
    if !(boundary <= BOUNDARY_TOL) {
        return Err(Error::ProfileNotDecaying { boundary_max: boundary });
    }
    let grid = profile.grid;
    let psi = okaji_state(Arc::new(profile.clone()))?;
    let npsi = psi.norm()?;
    let anti = psi.sub(&psi.antisymmetrized())?.norm()? / npsi;
    let d = psi.apply(&difference_ops());
    let sep = psi.apply(&h_dc_ops()).sub(&psi.apply(&h_plus_ops()))?;
    let operator_gap = d.norm()? / npsi;
    let operator_gap_check = sep.norm()? / npsi;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut form: f64 = 0.0;
    let mut form_sym: f64 = 0.0;
    for _ in 0..samples {
        let raw = random_product(&grid, &mut rng)?;
        let phi = raw.antisymmetrized();
        form = form.max(phi.inner(&d)?.norm() / (phi.norm()? * npsi));
        let phs = raw.symmetrized();
        form_sym = form_sym.max(phs.inner(&d)?.norm() / (phs.norm()? * npsi));
    }
    let antisymmetric_component = d.antisymmetrized().norm()? / npsi;
    let symmetric_component = d.symmetrized().norm()? / npsi;
    let separation_orders = (operator_gap / form.max(f64::MIN_POSITIVE)).log10();
    Ok(OkajiReport {
        n: grid.n(),
        box_len: grid.box_len(),
        rank_psi: psi.rank(),
        psi_is_antisymmetric: anti,
        operator_gap,
        operator_gap_check,
        form_gap: form,
        form_gap_symmetric: form_sym,
        antisymmetric_component,
        symmetric_component,
        samples,
        operator_gap_min: OPERATOR_GAP_MIN,
        form_gap_max: FORM_GAP_MAX,
        operator_gap_ok: operator_gap >= OPERATOR_GAP_MIN,
        form_gap_ok: form <= FORM_GAP_MAX,
        separation_orders,
        separation_ok: separation_orders >= SEPARATION_ORDERS,
        symmetric_ok: form_sym > SYMMETRIC_GAP_MIN,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleKappa {
    pub kappa: f64,
    pub samples: usize,
    pub violations: usize,
    pub min_slack: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TriangleReport {
    pub tolerance: f64,
    pub per_kappa: Vec<TriangleKappa>,
    pub boundary_cases_ok: bool,
    pub passed: bool,
}

pub const TRIANGLE_TOL: f64 = 1e-14;

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `|b|^{k/2} - ||a - b|^{k/2} - |a|^{k/2}|`.
pub fn triangle_slack(a: [f64; 3], b: [f64; 3], kappa: f64) -> f64 {
    let e = kappa / 2.0;
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    norm3(b).powf(e) - (norm3(d).powf(e) - norm3(a).powf(e)).abs()
}

fn random_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let r = 10f64.powf(rng.random_range(-3.0..2.0));
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [r * s * phi.cos(), r * s * phi.sin(), r * z]
}

pub fn mod_triangle_test(samples: usize, kappas: &[f64], seed: u64) -> Result<TriangleReport> {
    if samples == 0 {
        return Err(Error::OutOfRange { name: "samples", value: 0.0, range: ">= 1" });
    }
    let mut per = Vec::new();
    for (i, &kappa) in kappas.iter().enumerate() {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::OutOfRange { name: "kappa", value: kappa, range: "(0, 1]" });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let mut violations = 0;
        let mut min_slack = f64::INFINITY;
        for j in 0..samples {
            let a = random_vector(&mut rng);
            // Every 16th pair is (nearly) parallel, where the bound is tight.
            let b = if j % 16 == 0 { a.map(|c| c * rng.random_range(0.0..2.0)) } else { random_vector(&mut rng) };
            let s = triangle_slack(a, b, kappa);
            if s < -TRIANGLE_TOL {
                violations += 1;
            }
            min_slack = min_slack.min(s);
        }
        per.push(TriangleKappa { kappa, samples, violations, min_slack });
    }
    let a = [0.3, -1.2, 0.7];
    let boundary_cases_ok = kappas.iter().all(|&k| {
        triangle_slack(a, a, k).abs() <= TRIANGLE_TOL && triangle_slack(a, [0.0; 3], k).abs() <= TRIANGLE_TOL
    });
    let passed = boundary_cases_ok && per.iter().all(|p| p.violations == 0);
    Ok(TriangleReport { tolerance: TRIANGLE_TOL, per_kappa: per, boundary_cases_ok, passed })
}

/// `<f, (V_ext + gamma V) f>` with the regularized `V`.
pub fn potential_energy(f: &SpinorField, gamma: f64, kappa: f64, vext: Option<&[f64]>) -> Result<f64> {
    let grid = f.grid;
    let w = coulomb_weight(&grid, kappa)?;
    if let Some(v) = vext {
        if v.len() != grid.points() {
            return Err(Error::DimensionMismatch { expected: grid.points().to_string(), found: v.len().to_string() });
        }
    }
    let np = grid.points();
    let terms: Vec<f64> = (0..f.data.len())
        .map(|i| {
            let p = i % np;
            let pot = gamma * w[p] + vext.map_or(0.0, |v| v[p]);
            pot * f.data[i].norm_sqr()
        })
        .collect();
    Ok(grid.cell_volume() * pairwise_sum(&terms))
}
