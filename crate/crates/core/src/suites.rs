//! Named verification suites. Each returns a list of pass/fail checks plus
//! structured details; reports carry no timings so that equal seeds give
//! equal bytes.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::assembly::{
    assemble_extension, assemble_hrel, free_spectrum, schur_norm, to_plane_waves,
};
use crate::clifford::{
    self, clifford, kron, m_minus_dot, m_plus_dot, pauli, rank16, CMatrix16, CMatrix4, CVector16, C64,
};
use crate::coupling::{herbst_constant, CouplingReport};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ScalarField, SpinorField};
use crate::linalg::{self, eigen_residual, hermitian_eigen, multiset_distance, Inertia};
use crate::schur::{check_factorization, frobenius_schur, random_hermitian_blocks, schur_complement, BlockOperator};
use crate::singular::{kernel_errors, maximal_truncation, relative_l2, riesz_multiplier, riesz_potential, sphere_moments, CZKernel};
use crate::symbols::{a0_pinv, a0_symbol, diagonalizer, projector_symbols, tau_symbol, MomentumVec};
use crate::verification::{mod_triangle_test, nullspace_check, okaji_gap};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Clifford,
    Symbols,
    Kernels,
    Schur,
    Counterexamples,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Clifford, Suite::Symbols, Suite::Kernels, Suite::Schur, Suite::Counterexamples];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Clifford => "clifford",
            Suite::Symbols => "symbols",
            Suite::Kernels => "kernels",
            Suite::Schur => "schur",
            Suite::Counterexamples => "counterexamples",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "clifford" => Ok(Suite::Clifford),
            "symbols" => Ok(Suite::Symbols),
            "kernels" => Ok(Suite::Kernels),
            "schur" => Ok(Suite::Schur),
            "counterexamples" => Ok(Suite::Counterexamples),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub limit: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self::build(name, value, "<=", limit, value <= limit)
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self::build(name, value, ">=", limit, value >= limit)
    }

    pub fn below(name: &str, value: f64, limit: f64) -> Self {
        Self::build(name, value, "<", limit, value < limit)
    }

    pub fn above(name: &str, value: f64, limit: f64) -> Self {
        Self::build(name, value, ">", limit, value > limit)
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Self::build(name, if ok { 1.0 } else { 0.0 }, "==", 1.0, ok)
    }

    fn build(name: &str, value: f64, relation: &'static str, limit: f64, passed: bool) -> Self {
        Check { name: name.into(), value, relation, limit, passed, note: None }
    }

    pub fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub details: Value,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>, details: Value) -> Self {
        SuiteReport { suite: suite.name(), passed: checks.iter().all(|c| c.passed), checks, details }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks and details for one criterion-sized piece of a suite.
pub type Part = (Vec<Check>, Value);

pub fn run(suite: Suite, seed: u64) -> Result<Vec<SuiteReport>> {
    match suite {
        Suite::All => Suite::EACH.iter().map(|s| run_one(*s, seed)).collect(),
        s => Ok(vec![run_one(s, seed)?]),
    }
}

pub fn run_one(suite: Suite, seed: u64) -> Result<SuiteReport> {
    match suite {
        Suite::Clifford => clifford_suite(seed),
        Suite::Symbols => symbols_suite(seed),
        Suite::Kernels => kernels_suite(),
        Suite::Schur => schur_suite(seed),
        Suite::Counterexamples => counterexamples_suite(seed),
        Suite::All => Err(Error::OutOfRange { name: "suite", value: f64::NAN, range: "a single suite" }),
    }
}

fn max_abs(m: &CMatrix16) -> f64 {
    clifford::max_abs(m.iter())
}

fn diff(a: &CMatrix16, b: &CMatrix16) -> f64 {
    clifford::max_abs_diff(a, b)
}

/// Log-uniform radius in `[1e-3, 1e3]`, uniform direction.
pub fn random_momentum(rng: &mut ChaCha8Rng) -> MomentumVec {
    let r = 10f64.powf(rng.random_range(-3.0..3.0));
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi = rng.random_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    MomentumVec::new(r * s * phi.cos(), r * s * phi.sin(), r * z)
}

pub const MOMENTUM_SAMPLES: usize = 1000;
pub const EXACT_TOL: f64 = 1e-14;
pub const SYMBOL_TOL: f64 = 1e-12;

fn clifford_suite(seed: u64) -> Result<SuiteReport> {
    let c = clifford();
    let id4 = CMatrix4::identity();
    let mut anti: f64 = 0.0;
    let mut anti_beta: f64 = 0.0;
    for k in 0..3 {
        for l in 0..3 {
            let s = c.alpha[k] * c.alpha[l] + c.alpha[l] * c.alpha[k];
            let want = if k == l { id4 * C64::from(2.0) } else { CMatrix4::zeros() };
            anti = anti.max(clifford::max_abs_diff(&s, &want));
        }
        anti_beta = anti_beta.max(clifford::max_abs(
            (c.alpha[k] * c.beta + c.beta * c.alpha[k]).iter(),
        ));
    }
    let beta_sq = clifford::max_abs_diff(&(c.beta * c.beta), &id4);
    let comm = pauli(1)? * pauli(2)? - pauli(2)? * pauli(1)? - pauli(3)? * C64::new(0.0, 2.0);
    let mut herm: f64 = 0.0;
    let mut exch: f64 = 0.0;
    for k in 0..3 {
        herm = herm.max(hermiticity_defect16(&c.m_plus[k])).max(hermiticity_defect16(&c.m_minus[k]));
        exch = exch.max(diff(&(c.exchange * c.m_minus[k] * c.exchange), &(-c.m_minus[k])));
        exch = exch.max(diff(&(c.exchange * c.m_plus[k] * c.exchange), &c.m_plus[k]));
    }
    let b = c.b;
    let b_sq = diff(&(b * b), &(CMatrix16::identity() * C64::from(4.0)));
    let b_tr = b.trace().norm();
    let mut ev: Vec<f64> = m_minus_dot(&[0.0, 0.0, 1.0]).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let want: Vec<f64> = [[-2.0; 4].as_slice(), &[0.0; 8], &[2.0; 4]].concat();
    let ev_err = multiset_distance(&ev, &want).unwrap_or(f64::INFINITY);
    let v = crate::verification::nullspace_spinor();
    let null = (0..3).map(|k| clifford::max_abs((c.m_minus[k] * v).iter())).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mixed: f64 = 0.0;
    for _ in 0..20 {
        let m = |rng: &mut ChaCha8Rng| CMatrix4::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (a1, b1, c1, d1) = (m(&mut rng), m(&mut rng), m(&mut rng), m(&mut rng));
        mixed = mixed.max(diff(&(kron(&a1, &b1) * kron(&c1, &d1)), &kron(&(a1 * c1), &(b1 * d1))));
    }
    let mut rank_minus = 0usize;
    let mut rank_plus = 0usize;
    for _ in 0..MOMENTUM_SAMPLES {
        let p = random_momentum(&mut rng);
        let tol = 1e-10 * p.norm();
        if rank16(&m_minus_dot(&p.0), tol) != 8 {
            rank_minus += 1;
        }
        if rank16(&m_plus_dot(&p.0), tol) != 8 {
            rank_plus += 1;
        }
    }
    let checks = vec![
        Check::at_most("alpha_anticommutators", anti, EXACT_TOL),
        Check::at_most("alpha_beta_anticommutators", anti_beta, EXACT_TOL),
        Check::at_most("beta_squared", beta_sq, EXACT_TOL),
        Check::at_most("pauli_commutator", clifford::max_abs(comm.iter()), EXACT_TOL),
        Check::at_most("m_plus_minus_hermitian", herm, EXACT_TOL),
        Check::at_most("exchange_parity", exch, EXACT_TOL),
        Check::at_most("b_squared", b_sq, EXACT_TOL),
        Check::at_most("b_trace", b_tr, EXACT_TOL),
        Check::at_most("m_minus_e3_spectrum", ev_err, EXACT_TOL),
        Check::at_most("nullspace_spinor", null, EXACT_TOL),
        Check::at_most("kron_mixed_product", mixed, 1e-12),
        Check::at_most("rank_m_minus_not_8", rank_minus as f64, 0.0),
        Check::at_most("rank_m_plus_not_8", rank_plus as f64, 0.0),
    ];
    Ok(SuiteReport::new(Suite::Clifford, checks, json!({ "momentum_samples": MOMENTUM_SAMPLES })))
}

fn hermiticity_defect16(m: &CMatrix16) -> f64 {
    clifford::hermiticity_defect(m)
}

#[derive(Default)]
struct Worst(Vec<(&'static str, f64)>);

impl Worst {
    fn note(&mut self, name: &'static str, v: f64) {
        match self.0.iter_mut().find(|(n, _)| *n == name) {
            Some((_, w)) => *w = w.max(v),
            None => self.0.push((name, v)),
        }
    }
}

pub fn symbol_part(seed: u64) -> Result<Part> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let id = CMatrix16::identity();
    let b = clifford().b;
    let mut w = Worst::default();
    let mut rank_fail = 0usize;
    let mut compress: f64 = 0.0;
    for _ in 0..MOMENTUM_SAMPLES {
        let p = random_momentum(&mut rng);
        let pn = p.norm();
        let t = tau_symbol(&p);
        let (pp, pm) = projector_symbols(&p);
        let mdp = m_minus_dot(&p.0);
        w.note("tau_squared", diff(&(t * t), &id));
        w.note("projector_idempotent", diff(&(pp * pp), &pp).max(diff(&(pm * pm), &pm)));
        w.note("projector_orthogonal", max_abs(&(pp * pm)));
        w.note("projector_complete", diff(&(pp + pm), &id));
        // Identities that scale with |p| are compared relative to it.
        w.note("p_minus_annihilates_m_minus_p", max_abs(&(pm * mdp)) / pn.max(1.0));
        compress = compress.max(diff(&(pp * mdp * pp), &mdp) / pn);
        w.note("b_commutes_with_p_plus", diff(&(b * pp), &(pp * b)));
        let a = a0_symbol(&p);
        let scale = 4.0 * (pn * pn + 1.0);
        w.note("a0_squared", diff(&(a * a), &(pp * C64::from(scale))) / scale);
        w.note("a0_pinv", diff(&(a * a0_pinv(&p)), &pp));
        let u = diagonalizer(&p);
        w.note("u_unitary", diff(&(u * u.adjoint()), &id));
        let d = u * mdp * u.adjoint();
        let want = CMatrix16::from_diagonal(&CVector16::from_fn(|i, _| {
            C64::from(match i {
                0..=3 => -2.0 * pn,
                4..=7 => 2.0 * pn,
                _ => 0.0,
            })
        }));
        w.note("u_diagonalizes_m_minus_p", diff(&d, &want) / pn.max(1.0));
        if rank16(&mdp, 1e-10 * pn) != 8 {
            rank_fail += 1;
        }
    }
    let mut checks: Vec<Check> = w.0.iter().map(|(n, v)| Check::at_most(n, *v, SYMBOL_TOL)).collect();
    checks.push(Check::at_most("p_plus_compresses_m_minus_p", compress, 1e-10));
    checks.push(Check::at_most("kernel_rank_not_8", rank_fail as f64, 0.0));
    Ok((checks, json!({ "momentum_samples": MOMENTUM_SAMPLES, "tolerance": SYMBOL_TOL })))
}

pub fn constants_part() -> Result<Part> {
    let mut checks = Vec::new();
    let m1 = herbst_constant(1.0)?;
    let mh = herbst_constant(0.5)?;
    let thr = 1.0 / (mh * mh);
    checks.push(Check::at_most("constants.herbst_1_equals_2", (m1 - 2.0).abs() / 2.0, 1e-12));
    checks.push(Check::at_most("constants.threshold_equals_2_over_pi", (thr - 2.0 / PI).abs() / (2.0 / PI), 1e-12));
    Ok((checks, json!({ "coupling_kappa_1": CouplingReport::new(1.0)? })))
}

fn symbols_suite(seed: u64) -> Result<SuiteReport> {
    let (mut checks, symbols) = symbol_part(seed)?;
    let (c, constants) = constants_part()?;
    checks.extend(c);
    Ok(SuiteReport::new(Suite::Symbols, checks, json!({ "symbols": symbols, "constants": constants })))
}

pub const KERNEL_N: usize = 64;
pub const KERNEL_BOX: f64 = 16.0;
pub const KERNEL_TOL: f64 = 0.05;
pub const RIESZ_TOL: f64 = 0.02;

fn centered(f: &ScalarField) -> ScalarField {
    let m = f.mean();
    ScalarField { grid: f.grid, data: f.data.iter().map(|z| z - m).collect() }
}

/// `Delta` of a unit Gaussian up to a constant factor: mean zero.
pub fn laplacian_of_gaussian(grid: GridSpec) -> ScalarField {
    ScalarField::from_real(grid, |r| {
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        (r2 - 3.0) * (-r2 / 2.0).exp()
    })
}

pub fn kernel_part() -> Result<Part> {
    let grid = GridSpec::new(KERNEL_N, KERNEL_BOX)?;
    let h = grid.h();
    let f = ScalarField::gaussian(grid, [0.0; 3], 1.0);
    let eps = [4.0 * h, 2.0 * h, h];
    let mut checks = Vec::new();
    let mut per = Vec::new();
    for k in CZKernel::all() {
        let e = kernel_errors(&k, &f, &eps)?;
        let m = sphere_moments(&k, 32)?;
        let label = e.kernel.clone();
        checks.push(Check::at_most(&format!("{label}.error_at_h"), e.relative_error[2], KERNEL_TOL));
        let mono = e.relative_error.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::holds(&format!("{label}.error_decreasing"), mono));
        checks.push(Check::at_most(&format!("{label}.sphere_mean"), m.mean.abs(), 1e-8));
        per.push(json!({ "errors": e, "sphere": m }));
    }
    let a = maximal_truncation(&CZKernel::new(1, 2)?, &f, &[h, 2.0 * h, 4.0 * h, 8.0 * h])?;
    checks.push(Check::holds("maximal_truncation_finite", a.is_finite()));
    Ok((checks, json!({ "n": KERNEL_N, "box": KERNEL_BOX, "sigma": 1.0, "kernels": per, "maximal_truncation_a": a })))
}

pub fn riesz_part() -> Result<Part> {
    let grid = GridSpec::new(KERNEL_N, KERNEL_BOX)?;
    let mut checks = Vec::new();
    let lap = laplacian_of_gaussian(grid);
    let mut riesz = Vec::new();
    for alpha in [1.0, 2.0] {
        let e = relative_l2(&centered(&riesz_potential(alpha, &lap)?), &centered(&riesz_multiplier(alpha, &lap)?))?;
        checks.push(Check::at_most(&format!("riesz_alpha_{alpha}"), e, RIESZ_TOL));
        riesz.push(json!({ "alpha": alpha, "relative_error": e }));
    }
    Ok((checks, json!({ "n": KERNEL_N, "box": KERNEL_BOX, "riesz": riesz })))
}

fn kernels_suite() -> Result<SuiteReport> {
    let (mut checks, kernels) = kernel_part()?;
    let (c, riesz) = riesz_part()?;
    checks.extend(c);
    Ok(SuiteReport::new(Suite::Kernels, checks, json!({ "kernels": kernels, "riesz": riesz })))
}

pub const SPECTRUM_N: usize = 4;
pub const SPECTRUM_BOX: f64 = 8.0;
pub const SCHUR_INSTANCES: usize = 50;

/// Seeded smooth test field for action comparisons.
pub fn smooth_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpinorField {
    let spinor = CVector16::from_fn(|_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let c = [0, 1, 2].map(|_| rng.random_range(-0.3..0.3));
    let sigma = rng.random_range(0.8..1.2) * grid.box_len() / 8.0;
    SpinorField::from_profile(&spinor, &ScalarField::gaussian(grid, c, sigma))
}

pub fn factorization_part(seed: u64) -> Result<Part> {
    let mut checks = Vec::new();
    let mus = [C64::from(0.0), C64::new(0.0, 0.1), C64::from(1.0)];
    let (mut recon, mut inv): (f64, f64) = (0.0, 0.0);
    for i in 0..SCHUR_INSTANCES {
        let size = 10 + (i * 190) / (SCHUR_INSTANCES - 1);
        let d_plus = (size * (1 + i % 3)) / 4;
        let op = random_hermitian_blocks(d_plus, size - d_plus, seed.wrapping_add(i as u64));
        let chk = check_factorization(&op, mus[i % 3])?;
        recon = recon.max(chk.reconstruction_error);
        inv = inv.max(chk.r_inverse_error).max(chk.t_inverse_error);
    }
    checks.push(Check::at_most("reconstruction_error", recon, 1e-10));
    checks.push(Check::at_most("triangular_inverse_error", inv, 1e-12));
    let op = random_hermitian_blocks(100, 100, seed.wrapping_add(1000));
    let f = frobenius_schur(&op, C64::default())?;
    let adj = linalg::max_abs_diff(&f.r.adjoint(), &f.t) / linalg::max_abs(&f.t);
    checks.push(Check::at_most("adjoint_relation_r_t", adj, 1e-12));
    let one = |v: f64| linalg::CMatrix::from_element(1, 1, C64::from(v));
    let scalar = BlockOperator::new(one(2.0), one(1.0), one(1.0), one(1.0))?;
    let s = schur_complement(&scalar, C64::default())?[(0, 0)];
    checks.push(Check::at_most("scalar_example", (s - C64::from(0.5)).norm(), 1e-15));
    let mut haynsworth = 0usize;
    for i in 0..10u64 {
        let op = random_hermitian_blocks(12, 9, seed.wrapping_add(2000 + i));
        let s = linalg::hermitian_part(&schur_complement(&op, C64::default())?);
        if Inertia::of(&op.to_dense(), 1e-9) != Inertia::of(&op.a, 1e-9) + Inertia::of(&s, 1e-9) {
            haynsworth += 1;
        }
    }
    checks.push(Check::at_most("haynsworth_mismatches", haynsworth as f64, 0.0));
    Ok((checks, json!({ "instances": SCHUR_INSTANCES })))
}

pub fn spectra_part(seed: u64) -> Result<Part> {
    let mut checks = Vec::new();

    let grid = GridSpec::new(SPECTRUM_N, SPECTRUM_BOX)?;
    let h0 = assemble_hrel(&grid, 0.0, 1.0)?;
    let ev0 = linalg::hermitian_eigenvalues(&h0);
    let free = multiset_distance(&ev0, &free_spectrum(&grid)).unwrap_or(f64::INFINITY);
    checks.push(Check::at_most("free_spectrum_vs_symbol", free, 1e-10));
    let (gamma, kappa) = (0.5, 1.0);
    let ext = assemble_extension(&grid, gamma, kappa, None)?;
    let hrel = assemble_hrel(&grid, gamma, kappa)?;
    let scale = linalg::max_abs(&hrel);
    checks.push(Check::at_most("hrel_hermitian", linalg::hermiticity_defect(&hrel) / scale, 1e-12));
    checks.push(Check::at_most("extension_hermitian", linalg::hermiticity_defect(&ext.matrix) / scale, 1e-10));
    let (vals, vecs) = hermitian_eigen(&linalg::hermitian_part(&ext.matrix));
    let resid = eigen_residual(&ext.matrix, &vals, &vecs);
    checks.push(Check::at_most("extension_eigen_residual", resid, 1e-9));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
    let mut action: f64 = 0.0;
    for _ in 0..20 {
        let c = to_plane_waves(&smooth_field(grid, &mut rng));
        let a = &ext.matrix * &c;
        let b = &hrel * &c;
        action = action.max((&a - &b).norm() / b.norm());
    }
    checks.push(Check::at_most("extension_action_vs_hrel", action, 1e-8));
    let norm = schur_norm(&grid, gamma, kappa, &ext.blocks)?;
    let bound = ext.coupling.schur_bound(gamma);
    checks.push(Check::below("schur_norm_below_one", norm, 1.0));
    checks.push(Check::at_most("schur_norm_vs_bound", norm, 1.1 * bound));
    Ok((
        checks,
        json!({
            "n": SPECTRUM_N, "box": SPECTRUM_BOX, "gamma": gamma, "kappa": kappa,
            "mu": [ext.factors.mu.re, ext.factors.mu.im],
            "min_eigenvalue": vals.first(), "max_eigenvalue": vals.last(),
            "free_min": ev0.first(), "free_max": ev0.last(),
            "schur_norm": norm, "schur_bound": bound,
            "coupling": ext.coupling,
        }),
    ))
}

fn schur_suite(seed: u64) -> Result<SuiteReport> {
    let (mut checks, factorization) = factorization_part(seed)?;
    let (c, spectrum) = spectra_part(seed)?;
    checks.extend(c);
    Ok(SuiteReport::new(Suite::Schur, checks, json!({ "factorization": factorization, "spectrum": spectrum })))
}

pub const NULLSPACE_GRIDS: [usize; 3] = [16, 32, 64];
pub const OKAJI_N: usize = 32;
pub const OKAJI_BOX: f64 = 16.0;
pub const OKAJI_SAMPLES: usize = 10;
pub const TRIANGLE_SAMPLES: usize = 1_000_000;
pub const TRIANGLE_KAPPAS: [f64; 3] = [0.25, 0.5, 1.0];

const FORM_GAP_NOTE: &str = "compression of H_DC - H+ to antisymmetric states is M-.p_rel, which does not vanish there; see antisymmetric_component";

pub fn nullspace_part() -> Result<Part> {
    let null = nullspace_check(1.0, 0.25, 16.0, &NULLSPACE_GRIDS)?;
    let worst = null.levels.iter().map(|l| l.kernel_residual).fold(0.0, f64::max);
    let growth = null.growth.iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::at_most("nullspace.exact_residual", null.exact_residual, EXACT_TOL),
        Check::at_most("nullspace.kernel_residual", worst, 1e-10),
        Check::at_least("nullspace.v_growth", growth, crate::verification::NULLSPACE_GROWTH_MIN),
    ];
    Ok((checks, json!(null)))
}

pub fn okaji_part(seed: u64) -> Result<Part> {
    use crate::verification::{FORM_GAP_MAX, OPERATOR_GAP_MIN, SEPARATION_ORDERS, SYMMETRIC_GAP_MIN};
    let grid = GridSpec::new(OKAJI_N, OKAJI_BOX)?;
    let okaji = okaji_gap(&ScalarField::gaussian(grid, [0.0; 3], 1.0), OKAJI_SAMPLES, seed)?;
    let checks = vec![
        Check::at_least("okaji.operator_gap", okaji.operator_gap, OPERATOR_GAP_MIN),
        Check::at_most("okaji.form_gap", okaji.form_gap, FORM_GAP_MAX).with_note(FORM_GAP_NOTE),
        Check::at_least("okaji.separation_orders", okaji.separation_orders, SEPARATION_ORDERS).with_note(FORM_GAP_NOTE),
        Check::above("okaji.form_gap_symmetric", okaji.form_gap_symmetric, SYMMETRIC_GAP_MIN),
    ];
    Ok((checks, json!(okaji)))
}

pub fn triangle_part(seed: u64) -> Result<Part> {
    let tri = mod_triangle_test(TRIANGLE_SAMPLES, &TRIANGLE_KAPPAS, seed)?;
    let viol: usize = tri.per_kappa.iter().map(|p| p.violations).sum();
    let checks = vec![
        Check::at_most("triangle.violations", viol as f64, 0.0),
        Check::holds("triangle.boundary_cases", tri.boundary_cases_ok),
    ];
    Ok((checks, json!(tri)))
}

fn counterexamples_suite(seed: u64) -> Result<SuiteReport> {
    let (mut checks, kernel) = nullspace_part()?;
    let (c, okaji) = okaji_part(seed)?;
    checks.extend(c);
    let (c, tri) = triangle_part(seed)?;
    checks.extend(c);
    Ok(SuiteReport::new(
        Suite::Counterexamples,
        checks,
        json!({ "nullspace": kernel, "okaji": okaji, "triangle": tri }),
    ))
}
