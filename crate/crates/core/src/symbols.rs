//! Pointwise 16x16 momentum-space symbols: `M-.p`, `P.M+`, `tau(p)`,
//! `P+-(p)`, the diagonalizer `u(p)` and the `A0` family.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::clifford::{alpha_dot, clifford, kron, m_minus_dot, m_plus_dot, CMatrix16, CMatrix4, CVector16, C64};

/// Real 3-vector in units with `hbar = c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentumVec(pub [f64; 3]);

impl MomentumVec {
    pub const E3: MomentumVec = MomentumVec([0.0, 0.0, 1.0]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        MomentumVec([x, y, z])
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        MomentumVec(self.0.map(|c| c * s))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Unit vector, with `e3` substituted at the origin.
    pub fn direction(&self) -> (Self, bool) {
        let n = self.norm();
        if n == 0.0 {
            (Self::E3, true)
        } else {
            (self.scaled(1.0 / n), false)
        }
    }
}

/// `tau(p) = -(alpha.p (x) alpha.p) / p^2`. At `p = 0` the value at `e3` is used.
pub fn tau_symbol(p: &MomentumVec) -> CMatrix16 {
    let (unit, _) = p.direction();
    let a = alpha_dot(&unit.0);
    -kron(&a, &a)
}

/// `(P+(p), P-(p)) = ((1 + tau)/2, (1 - tau)/2)`.
pub fn projector_symbols(p: &MomentumVec) -> (CMatrix16, CMatrix16) {
    let tau = tau_symbol(p);
    let id = CMatrix16::identity();
    let half = C64::new(0.5, 0.0);
    ((id + tau) * half, (id - tau) * half)
}

/// Unitary `u(p)` with `u (M-.p) u^dagger = 2 diag(-|p| 1_4, |p| 1_4, 0_8)`.
///
/// Rows of `u` are conjugated eigenvectors. Eigenspaces are fixed by the
/// analytic projectors `Pi-(x)Pi+`, `Pi+(x)Pi-` and `Pi+(x)Pi+ + Pi-(x)Pi-`
/// with `Pi+- = (1 +- alpha.p^)/2`; each block gets a canonical orthonormal
/// basis (Gram-Schmidt on the standard basis, phase-normalized, then sorted
/// lexicographically).
pub fn diagonalizer(p: &MomentumVec) -> CMatrix16 {
    let (unit, _) = p.direction();
    let a = alpha_dot(&unit.0);
    let id = CMatrix4::identity();
    let half = C64::new(0.5, 0.0);
    let pi_p = (id + a) * half;
    let pi_m = (id - a) * half;
    let blocks = [
        kron(&pi_m, &pi_p),
        kron(&pi_p, &pi_m),
        kron(&pi_p, &pi_p) + kron(&pi_m, &pi_m),
    ];
    let mut u = CMatrix16::zeros();
    let mut row = 0;
    for proj in &blocks {
        for v in canonical_basis(proj) {
            u.set_row(row, &v.adjoint());
            row += 1;
        }
    }
    debug_assert_eq!(row, 16);
    u
}

fn canonical_basis(proj: &CMatrix16) -> Vec<CVector16> {
    let mut basis: Vec<CVector16> = Vec::new();
    for j in 0..16 {
        let mut v: CVector16 = proj.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / C64::from(n));
        }
    }
    for v in basis.iter_mut() {
        phase_normalize(v);
    }
    basis.sort_by(lex_cmp);
    basis
}

fn phase_normalize(v: &mut CVector16) {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-12).copied() {
        let phase = first.conj() / C64::from(first.norm());
        *v *= phase;
    }
}

/// Lexicographic on `(re, im)` pairs, descending so that the vector whose
/// leading entry is largest comes first; differences below 1e-12 are ties.
fn lex_cmp(a: &CVector16, b: &CVector16) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > 1e-12 {
                return q.partial_cmp(&p).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}

/// `A0(p) = M-.p + B P+(p)`.
pub fn a0_symbol(p: &MomentumVec) -> CMatrix16 {
    let (pp, _) = projector_symbols(p);
    m_minus_dot(&p.0) + clifford().b * pp
}

/// `|A0(p)| = 2 (p^2 + 1)^(1/2) P+(p)`.
pub fn a0_abs(p: &MomentumVec) -> CMatrix16 {
    let (pp, _) = projector_symbols(p);
    pp * C64::from(2.0 * (p.norm_sq() + 1.0).sqrt())
}

/// `A0(p) / (4 (p^2 + 1))`: inverse of `A0` on `ran P+`, zero on `ran P-`.
pub fn a0_pinv(p: &MomentumVec) -> CMatrix16 {
    a0_symbol(p) * C64::from(1.0 / (4.0 * (p.norm_sq() + 1.0)))
}

/// `P.M+ + M-.p + m1 beta(x)1 + m2 1(x)beta`.
pub fn full_symbol(big_p: &MomentumVec, p: &MomentumVec, m1: f64, m2: f64) -> CMatrix16 {
    let c = clifford();
    m_plus_dot(&big_p.0) + m_minus_dot(&p.0) + c.beta_1 * C64::from(m1) + c.one_beta * C64::from(m2)
}

/// All relative-momentum symbols at one point.
#[derive(Debug, Clone)]
pub struct SymbolSet {
    pub p: MomentumVec,
    pub m_minus_dot_p: CMatrix16,
    pub tau: CMatrix16,
    pub p_plus: CMatrix16,
    pub p_minus: CMatrix16,
    pub a0: CMatrix16,
    pub u: CMatrix16,
    /// True when `p = 0` and the `e3` direction was substituted.
    pub zero_mode_fallback: bool,
}

impl SymbolSet {
    pub fn new(p: MomentumVec) -> Self {
        let (pp, pm) = projector_symbols(&p);
        let mdp = m_minus_dot(&p.0);
        SymbolSet {
            p,
            m_minus_dot_p: mdp,
            tau: tau_symbol(&p),
            p_plus: pp,
            p_minus: pm,
            a0: mdp + clifford().b * pp,
            u: diagonalizer(&p),
            zero_mode_fallback: p.norm_sq() == 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{hermiticity_defect, max_abs, max_abs_diff, rank16};
    use proptest::prelude::*;

    fn momentum() -> impl Strategy<Value = MomentumVec> {
        // Log-spaced radius with a uniform direction.
        (-3.0f64..3.0, -1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(lr, ct, ph)| {
            let r = 10f64.powf(lr);
            let st = (1.0 - ct * ct).sqrt();
            MomentumVec::new(r * st * ph.cos(), r * st * ph.sin(), r * ct)
        })
    }

    fn diag(m: &CMatrix16) -> Vec<f64> {
        (0..16).map(|i| m[(i, i)].re).collect()
    }

    #[test]
    fn tau_at_e3() {
        let a3 = clifford().alpha[2];
        assert_eq!(tau_symbol(&MomentumVec::E3), -kron(&a3, &a3));
        assert_eq!(tau_symbol(&MomentumVec::default()), tau_symbol(&MomentumVec::E3));
    }

    #[test]
    fn diagonalizer_at_e3() {
        let u = diagonalizer(&MomentumVec::E3);
        let d = u * m_minus_dot(&[0.0, 0.0, 1.0]) * u.adjoint();
        let mut expected = vec![-2.0; 4];
        expected.extend([2.0; 4]);
        expected.extend([0.0; 8]);
        for (x, y) in diag(&d).iter().zip(&expected) {
            assert!((x - y).abs() < 1e-13);
        }
        let off = d - CMatrix16::from_diagonal(&d.diagonal());
        assert!(max_abs(&off) < 1e-13);
    }

    #[test]
    fn diagonalizer_is_deterministic_and_phase_normalized() {
        let p = MomentumVec::new(0.3, -1.1, 0.7);
        let u1 = diagonalizer(&p);
        let u2 = diagonalizer(&p);
        assert_eq!(u1, u2);
        for r in 0..16 {
            let row = u1.row(r).adjoint();
            let first = row.iter().find(|z| z.norm() > 1e-12).unwrap();
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn a0_product_with_pinv() {
        // Ten fixed momenta, checked by plain matrix multiplication.
        for i in 0..10 {
            let t = i as f64;
            let p = MomentumVec::new((0.7 * t).sin() * 3.0, (1.3 * t).cos(), 0.2 * t - 1.0);
            let (pp, _) = projector_symbols(&p);
            assert!(max_abs_diff(&(a0_symbol(&p) * a0_pinv(&p)), &pp) < 1e-12);
        }
    }

    #[test]
    fn a0_at_zero_momentum() {
        let p = MomentumVec::default();
        let (pp, _) = projector_symbols(&p);
        let a = a0_symbol(&p);
        assert!(max_abs_diff(&(a * a), &(pp * C64::from(4.0))) < 1e-13);
        assert!(max_abs_diff(&a0_abs(&p), &(pp * C64::from(2.0))) < 1e-13);
    }

    #[test]
    fn full_symbol_cases() {
        let z = MomentumVec::default();
        assert_eq!(full_symbol(&z, &z, 0.0, 0.0), CMatrix16::zeros());
        let p = MomentumVec::new(0.4, 0.1, -0.9);
        let mut ev: Vec<f64> = full_symbol(&z, &p, 0.0, 0.0).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let n = p.norm();
        let mut expected = vec![-2.0 * n; 4];
        expected.extend([0.0; 8]);
        expected.extend([2.0 * n; 4]);
        for (x, y) in ev.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn symbol_set_flags_zero_mode() {
        assert!(SymbolSet::new(MomentumVec::default()).zero_mode_fallback);
        assert!(!SymbolSet::new(MomentumVec::E3).zero_mode_fallback);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn tau_involution_and_homogeneity(p in momentum(), lam in 0.01f64..100.0) {
            let t = tau_symbol(&p);
            prop_assert!(max_abs_diff(&(t * t), &CMatrix16::identity()) <= 1e-12);
            prop_assert!(hermiticity_defect(&t) <= 1e-12);
            prop_assert!(max_abs_diff(&tau_symbol(&p.scaled(lam)), &t) <= 1e-12);
        }

        #[test]
        fn projector_algebra(p in momentum()) {
            let (pp, pm) = projector_symbols(&p);
            prop_assert!(max_abs_diff(&(pp * pp), &pp) <= 1e-12);
            prop_assert!(max_abs_diff(&(pm * pm), &pm) <= 1e-12);
            prop_assert!(max_abs(&(pp * pm)) <= 1e-12);
            prop_assert!(max_abs_diff(&(pp + pm), &CMatrix16::identity()) <= 1e-12);
            let mdp = m_minus_dot(&p.0);
            prop_assert!(max_abs(&(pm * mdp)) <= 1e-12 * p.norm().max(1.0));
            prop_assert!(max_abs_diff(&(pp * mdp * pp), &mdp) <= 1e-10 * p.norm());
            prop_assert_eq!(rank16(&pm, 1e-10), 8);
            let b = clifford().b;
            prop_assert!(max_abs_diff(&(b * pp), &(pp * b)) <= 1e-12);
        }

        #[test]
        fn a0_identities(p in momentum()) {
            let (pp, _) = projector_symbols(&p);
            let a = a0_symbol(&p);
            let scale = 4.0 * (p.norm_sq() + 1.0);
            prop_assert!(max_abs_diff(&(a * a), &(pp * C64::from(scale))) <= 1e-12 * scale);
            // |A0| from the spectral decomposition of the Hermitian A0.
            let eig = a.symmetric_eigen();
            let abs = eig.eigenvectors
                * CMatrix16::from_diagonal(&eig.eigenvalues.map(|l| C64::from(l.abs())))
                * eig.eigenvectors.adjoint();
            prop_assert!(max_abs_diff(&abs, &a0_abs(&p)) <= 1e-12 * scale.sqrt());
        }

        #[test]
        fn diagonalizer_properties(p in momentum()) {
            let u = diagonalizer(&p);
            prop_assert!(max_abs_diff(&(u * u.adjoint()), &CMatrix16::identity()) <= 1e-12);
            let d = u * m_minus_dot(&p.0) * u.adjoint();
            let n = p.norm();
            let mut expected = vec![-2.0 * n; 4];
            expected.extend([2.0 * n; 4]);
            expected.extend([0.0; 8]);
            let target = CMatrix16::from_diagonal(&CVector16::from_iterator(expected.iter().map(|x| C64::from(*x))));
            prop_assert!(max_abs_diff(&d, &target) <= 1e-12 * n.max(1.0));
            let (_, pm) = projector_symbols(&p);
            let mut dp = [0.0; 16];
            dp[8..].fill(1.0);
            let target = CMatrix16::from_diagonal(&CVector16::from_iterator(dp.iter().map(|x| C64::from(*x))));
            prop_assert!(max_abs_diff(&(u * pm * u.adjoint()), &target) <= 1e-12);
        }

        #[test]
        fn full_symbol_hermitian(pc in momentum(), p in momentum(), m1 in 0.0f64..3.0, m2 in 0.0f64..3.0) {
            prop_assert!(hermiticity_defect(&full_symbol(&pc, &p, m1, m2)) <= 1e-12);
        }

        #[test]
        fn spectrum_multiplicities(p in momentum()) {
            let mut ev: Vec<f64> = m_minus_dot(&p.0).symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let n = p.norm();
            let tol = 1e-12 * n.max(1.0);
            prop_assert!(ev[..4].iter().all(|x| (x + 2.0 * n).abs() <= tol));
            prop_assert!(ev[4..12].iter().all(|x| x.abs() <= tol));
            prop_assert!(ev[12..].iter().all(|x| (x - 2.0 * n).abs() <= tol));
        }
    }
}
