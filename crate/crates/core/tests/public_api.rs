use std::f64::consts::PI;

use dirac2b_core::assembly::{free_spectrum, from_plane_waves, to_plane_waves};
use dirac2b_core::grid::apply_multiplier;
use dirac2b_core::schur::frobenius_schur;
use dirac2b_core::{
    admissible, assemble_hrel, snapshot, BlockOperator, CVector16, Error, GridSpec, Multiplier, ScalarField,
    SpinorField, Suite, C64,
};

fn spinor() -> CVector16 {
    CVector16::from_fn(|i, _| C64::new(1.0 + i as f64, 0.5 - 0.25 * i as f64))
}

#[test]
fn coupling_threshold_at_kappa_one() {
    let (ok, r) = admissible(0.5, 1.0).unwrap();
    assert!(ok);
    assert!((r.gamma_threshold - 2.0 / PI).abs() < 1e-12);
    match dirac2b_core::coupling::require_admissible(0.7, 1.0) {
        Err(Error::Inadmissible { threshold, .. }) => assert!((threshold - 2.0 / PI).abs() < 1e-12),
        other => panic!("expected inadmissible, got {other:?}"),
    }
}

#[test]
fn p_minus_kills_relative_free_operator_on_grid() {
    let grid = GridSpec::new(16, 8.0).unwrap();
    let f = SpinorField::from_profile(&spinor(), &ScalarField::gaussian(grid, [0.2, -0.1, 0.0], 1.0));
    let g = apply_multiplier(&Multiplier::m_minus_dot_p(), &f);
    let h = apply_multiplier(&Multiplier::p_minus(), &g);
    assert!(h.norm() <= 1e-12 * g.norm(), "{} vs {}", h.norm(), g.norm());
}

#[test]
fn free_operator_factorizes_and_matches_symbols() {
    let grid = GridSpec::new(4, 4.0).unwrap();
    let h = assemble_hrel(&grid, 0.0, 1.0).unwrap();
    let op = BlockOperator::from_dense(&(&h + dirac2b_core::linalg::CMatrix::identity(h.nrows(), h.ncols()) * C64::from(3.0)), 512).unwrap();
    let f = frobenius_schur(&op, C64::new(0.0, 0.1)).unwrap();
    assert!(f.reconstruction_error(&op.to_dense()) < 1e-10);
    let ev = dirac2b_core::linalg::hermitian_eigenvalues(&h);
    let d = dirac2b_core::linalg::multiset_distance(&ev, &free_spectrum(&grid)).unwrap();
    assert!(d < 1e-10, "{d}");
}

#[test]
fn plane_wave_field_survives_snapshot() {
    let grid = GridSpec::new(4, 4.0).unwrap();
    let f = SpinorField::from_profile(&spinor(), &ScalarField::gaussian(grid, [0.0; 3], 0.6));
    let back = from_plane_waves(grid, &to_plane_waves(&f)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("f");
    snapshot::write(&back, &stem).unwrap();
    let read = snapshot::read(&stem).unwrap();
    assert!(read.sub(&f).unwrap().norm() <= 1e-12 * f.norm());
}

#[test]
fn symbols_suite_passes() {
    let r = dirac2b_core::suites::run_one(Suite::Symbols, 11).unwrap();
    assert!(r.passed, "{:?}", r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
}
