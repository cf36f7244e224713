//! Pauli and Dirac matrices, Kronecker products and the fixed 16x16
//! coefficient matrices `M+_k`, `M-_k`, `B`.
//!
//! Kronecker convention: the first factor is the slower index, so entry
//! `(4i+k, 4j+l)` of `kron(a, b)` is `a[(i,j)] * b[(k,l)]`.

use std::sync::OnceLock;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix2 = SMatrix<C64, 2, 2>;
pub type CMatrix4 = SMatrix<C64, 4, 4>;
pub type CMatrix16 = SMatrix<C64, 16, 16>;
pub type CVector4 = SVector<C64, 4>;
pub type CVector16 = SVector<C64, 16>;

/// Absolute tolerance for identities between exact small-integer matrices.
pub const IDENTITY_TOL: f64 = 1e-14;

const O: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

fn check_index(what: &'static str, k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what, index: k })
    }
}

/// Pauli matrix `sigma_k`, `k` in 1..=3.
pub fn pauli(k: usize) -> Result<CMatrix2> {
    check_index("pauli", k)?;
    Ok(match k {
        1 => CMatrix2::new(O, ONE, ONE, O),
        2 => CMatrix2::new(O, -I, I, O),
        _ => CMatrix2::new(ONE, O, O, -ONE),
    })
}

/// `alpha_k = [[0, sigma_k], [sigma_k, 0]]`.
pub fn dirac_alpha(k: usize) -> Result<CMatrix4> {
    let s = pauli(k)?;
    let mut a = CMatrix4::zeros();
    a.fixed_view_mut::<2, 2>(0, 2).copy_from(&s);
    a.fixed_view_mut::<2, 2>(2, 0).copy_from(&s);
    Ok(a)
}

/// `beta = diag(1, 1, -1, -1)`.
pub fn dirac_beta() -> CMatrix4 {
    CMatrix4::from_diagonal(&CVector4::new(ONE, ONE, -ONE, -ONE))
}

pub fn kron(a: &CMatrix4, b: &CMatrix4) -> CMatrix16 {
    let mut out = CMatrix16::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let aij = a[(i, j)];
            if aij == O {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Kronecker product of two 4-vectors, same index convention as [`kron`].
pub fn kron_vec(a: &CVector4, b: &CVector4) -> CVector16 {
    CVector16::from_fn(|r, _| a[r / 4] * b[r % 4])
}

/// `M+_k = (alpha_k (x) 1 + 1 (x) alpha_k) / 2`.
pub fn m_plus(k: usize) -> Result<CMatrix16> {
    let a = dirac_alpha(k)?;
    let id = CMatrix4::identity();
    Ok((kron(&a, &id) + kron(&id, &a)) * C64::new(0.5, 0.0))
}

/// `M-_k = alpha_k (x) 1 - 1 (x) alpha_k`.
pub fn m_minus(k: usize) -> Result<CMatrix16> {
    let a = dirac_alpha(k)?;
    let id = CMatrix4::identity();
    Ok(kron(&a, &id) - kron(&id, &a))
}

/// `B = 2 beta (x) beta`.
pub fn b_matrix() -> CMatrix16 {
    let b = dirac_beta();
    kron(&b, &b) * C64::new(2.0, 0.0)
}

/// Cached copies of the fixed matrices, built once.
#[derive(Debug, Clone)]
pub struct Clifford {
    pub alpha: [CMatrix4; 3],
    pub beta: CMatrix4,
    pub m_plus: [CMatrix16; 3],
    pub m_minus: [CMatrix16; 3],
    pub b: CMatrix16,
    pub beta_1: CMatrix16,
    pub one_beta: CMatrix16,
    pub beta_beta: CMatrix16,
    /// Factor exchange `e_i (x) e_j -> e_j (x) e_i`.
    pub exchange: CMatrix16,
}

pub fn clifford() -> &'static Clifford {
    static CELL: OnceLock<Clifford> = OnceLock::new();
    CELL.get_or_init(|| {
        let alpha = [1, 2, 3].map(|k| dirac_alpha(k).expect("valid index"));
        let beta = dirac_beta();
        let id = CMatrix4::identity();
        let mut exchange = CMatrix16::zeros();
        for i in 0..4 {
            for j in 0..4 {
                exchange[(4 * j + i, 4 * i + j)] = ONE;
            }
        }
        Clifford {
            alpha,
            beta,
            m_plus: [1, 2, 3].map(|k| m_plus(k).expect("valid index")),
            m_minus: [1, 2, 3].map(|k| m_minus(k).expect("valid index")),
            b: b_matrix(),
            beta_1: kron(&beta, &id),
            one_beta: kron(&id, &beta),
            beta_beta: kron(&beta, &beta),
            exchange,
        }
    })
}

/// `sum_k v_k alpha_k`.
pub fn alpha_dot(v: &[f64; 3]) -> CMatrix4 {
    let c = clifford();
    c.alpha[0] * C64::from(v[0]) + c.alpha[1] * C64::from(v[1]) + c.alpha[2] * C64::from(v[2])
}

/// `sum_k v_k M-_k`.
pub fn m_minus_dot(v: &[f64; 3]) -> CMatrix16 {
    let c = clifford();
    c.m_minus[0] * C64::from(v[0]) + c.m_minus[1] * C64::from(v[1]) + c.m_minus[2] * C64::from(v[2])
}

/// `sum_k v_k M+_k`.
pub fn m_plus_dot(v: &[f64; 3]) -> CMatrix16 {
    let c = clifford();
    c.m_plus[0] * C64::from(v[0]) + c.m_plus[1] * C64::from(v[1]) + c.m_plus[2] * C64::from(v[2])
}

/// Largest entry modulus.
pub fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff<const R: usize, const C: usize>(
    a: &SMatrix<C64, R, C>,
    b: &SMatrix<C64, R, C>,
) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// `max |M - M^dagger|`.
pub fn hermiticity_defect<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Number of singular values above `tol`.
pub fn rank16(m: &CMatrix16, tol: f64) -> usize {
    m.singular_values().iter().filter(|s| **s > tol).count()
}
