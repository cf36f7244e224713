use std::path::Path;

use serde_json::{json, Value};

use dirac2b_core::assembly::{assemble_extension, fiber_operator, from_plane_waves, potential_matrix, schur_norm};
use dirac2b_core::grid::coulomb_weight;
use dirac2b_core::linalg::{eigen_residual, hermitian_eigen, hermitian_part, hermiticity_defect, matmul, max_abs};
use dirac2b_core::singular::{kernel_errors, maximal_truncation, sphere_moments, CZKernel};
use dirac2b_core::suites::{self, Check};
use dirac2b_core::{snapshot, CouplingReport, MomentumVec, ScalarField};

use crate::config::{CommandKind, RunConfig, Which};
use crate::{CliError, Report};

pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        CommandKind::Constants => constants(cfg),
        CommandKind::Kernels => kernels(cfg),
        CommandKind::Spectrum => spectrum(cfg),
        CommandKind::Verify => verify(cfg),
        CommandKind::Counterexample => counterexample(cfg),
    }
}

fn required<T: Copy>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing {what}")))
}

fn constants(cfg: &RunConfig) -> Result<Report, CliError> {
    let kappa = required(cfg.kappa, "kappa")?;
    let mut coupling = CouplingReport::new(kappa)?;
    if let Some(g) = cfg.gamma {
        coupling = coupling.with_gamma(g);
    }
    let riesz: Vec<Value> = [1.0, 2.0]
        .iter()
        .map(|&a| Ok(json!({ "alpha": a, "c_alpha": dirac2b_core::riesz_constant(a)? })))
        .collect::<Result<_, dirac2b_core::Error>>()?;
    Ok(Report::new(cfg, Some(coupling), Vec::new(), json!({ "riesz_constants": riesz })))
}

fn kernels(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid = required(cfg.grid, "grid")?;
    let mut eps = cfg.eps.clone().unwrap_or_default();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let f = ScalarField::gaussian(grid, [0.0; 3], required(cfg.sigma, "sigma")?);
    let mut checks = Vec::new();
    let mut per = Vec::new();
    for k in CZKernel::all() {
        let e = kernel_errors(&k, &f, &eps)?;
        let m = sphere_moments(&k, 32)?;
        let a = maximal_truncation(&k, &f, &eps)?;
        let mono = e.relative_error.windows(2).all(|w| w[1] < w[0]);
        checks.push(Check::holds(&format!("{}.error_decreasing", e.kernel), mono));
        checks.push(Check::at_most(&format!("{}.sphere_mean", e.kernel), m.mean.abs(), 1e-8));
        per.push(json!({ "errors": e, "sphere": m, "maximal_truncation_a": a }));
    }
    let results = json!({ "grid": { "n": grid.n(), "box": grid.box_len(), "h": grid.h() }, "kernels": per });
    Ok(Report::new(cfg, None, checks, results))
}

fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let grid = required(cfg.grid, "grid")?;
    let gamma = required(cfg.gamma, "gamma")?;
    let kappa = required(cfg.kappa, "kappa")?;
    let coupling = CouplingReport::new(kappa)?.with_gamma(gamma);
    let ext = assemble_extension(&grid, gamma, kappa, None)?;
    let h = match cfg.pvec {
        Some(p) => fiber_operator(
            &grid,
            &MomentumVec::new(p[0], p[1], p[2]),
            &ext.matrix,
            cfg.m1.unwrap_or(0.0),
            cfg.m2.unwrap_or(0.0),
            None,
        )?,
        None => ext.matrix.clone(),
    };
    let herm = hermiticity_defect(&h) / max_abs(&h).max(f64::MIN_POSITIVE);
    let (vals, vecs) = hermitian_eigen(&hermitian_part(&h));
    let residual = eigen_residual(&h, &vals, &vecs);
    let norm = schur_norm(&grid, gamma, kappa, &ext.blocks)?;
    let bound = coupling.schur_bound(gamma);

    let w: Vec<f64> = coulomb_weight(&grid, kappa)?.iter().map(|v| gamma * v).collect();
    let vv = matmul(&potential_matrix(&grid, &w)?, &vecs);
    let energies: Vec<f64> = (0..vals.len()).map(|i| vecs.column(i).dotc(&vv.column(i)).re).collect();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let e_max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut snap = Value::Null;
    if let Some(stem) = &cfg.snapshot {
        let i = (0..vals.len()).min_by(|a, b| vals[*a].abs().total_cmp(&vals[*b].abs())).unwrap_or(0);
        let field = from_plane_waves(grid, &vecs.column(i).into_owned())?;
        let meta = snapshot::write(&field, Path::new(stem))?;
        snap = json!({ "stem": stem, "eigenvalue": vals[i], "meta": meta });
    }

    let checks = vec![
        Check::at_most("hermiticity_defect", herm, 1e-10),
        Check::at_most("eigen_residual", residual, 1e-9),
        Check::below("schur_norm", norm, 1.0),
        Check::holds("potential_energy_finite", energies.iter().all(|e| e.is_finite())),
    ];
    let results = json!({
        "grid": { "n": grid.n(), "box": grid.box_len(), "h": grid.h(), "dim": vals.len() },
        "operator": if cfg.pvec.is_some() { "fiber" } else { "relative" },
        "mu": [ext.factors.mu.re, ext.factors.mu.im],
        "min_eigenvalue": vals.first(),
        "max_eigenvalue": vals.last(),
        "schur_norm": norm,
        "schur_bound": bound,
        "potential_energy": { "min": e_min, "max": e_max, "values": energies },
        "eigenvalues": vals,
        "snapshot": snap,
    });
    Ok(Report::new(cfg, Some(coupling), checks, results))
}

fn verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let reports = suites::run(required(cfg.suite, "suite")?, required(cfg.seed, "seed")?)?;
    let mut checks = Vec::new();
    let mut details = Vec::new();
    for r in reports {
        checks.extend(r.checks.into_iter().map(|mut c| {
            c.name = format!("{}.{}", r.suite, c.name);
            c
        }));
        details.push(json!({ "suite": r.suite, "passed": r.passed, "details": r.details }));
    }
    Ok(Report::new(cfg, None, checks, json!({ "suites": details })))
}

fn counterexample(cfg: &RunConfig) -> Result<Report, CliError> {
    let seed = required(cfg.seed, "seed")?;
    let which = required(cfg.which, "which")?;
    let mut checks = Vec::new();
    let mut results = serde_json::Map::new();
    if matches!(which, Which::Nullspace | Which::All) {
        let (c, d) = suites::nullspace_part()?;
        checks.extend(c);
        results.insert("nullspace".into(), d);
    }
    if matches!(which, Which::Okaji | Which::All) {
        let (c, d) = suites::okaji_part(seed)?;
        checks.extend(c);
        results.insert("okaji".into(), d);
    }
    if matches!(which, Which::Triangle | Which::All) {
        let (c, d) = suites::triangle_part(seed)?;
        checks.extend(c);
        results.insert("triangle".into(), d);
    }
    Ok(Report::new(cfg, None, checks, Value::Object(results)))
}
