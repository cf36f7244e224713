//! 2x2 block operators, Schur complements and the Frobenius-Schur
//! factorization `R diag(A - mu, S(mu)) T + mu`.

use serde::Serialize;

use crate::clifford::C64;
use crate::error::{Error, Result};
use crate::linalg::{matmul, max_abs_diff, CMatrix};

/// Largest condition number of `A - mu` accepted by the factorization.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub d: CMatrix,
}

impl BlockOperator {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        let (p, m) = (a.nrows(), d.nrows());
        let want = [(&a, p, p), (&b, p, m), (&c, m, p), (&d, m, m)];
        for (blk, r, cc) in want {
            if blk.nrows() != r || blk.ncols() != cc {
                return Err(Error::DimensionMismatch {
                    expected: format!("{r}x{cc}"),
                    found: format!("{}x{}", blk.nrows(), blk.ncols()),
                });
            }
        }
        Ok(BlockOperator { a, b, c, d })
    }

    /// Split a square matrix after the first `d_plus` rows and columns.
    pub fn from_dense(m: &CMatrix, d_plus: usize) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || d_plus > n {
            return Err(Error::DimensionMismatch {
                expected: format!("square, d_plus <= {n}"),
                found: format!("{}x{}, d_plus {d_plus}", n, m.ncols()),
            });
        }
        let d_minus = n - d_plus;
        Self::new(
            m.view((0, 0), (d_plus, d_plus)).into_owned(),
            m.view((0, d_plus), (d_plus, d_minus)).into_owned(),
            m.view((d_plus, 0), (d_minus, d_plus)).into_owned(),
            m.view((d_plus, d_plus), (d_minus, d_minus)).into_owned(),
        )
    }

    pub fn d_plus(&self) -> usize {
        self.a.nrows()
    }

    pub fn d_minus(&self) -> usize {
        self.d.nrows()
    }

    pub fn dim(&self) -> usize {
        self.d_plus() + self.d_minus()
    }

    pub fn to_dense(&self) -> CMatrix {
        join(&self.a, &self.b, &self.c, &self.d)
    }

    /// `A = A^*`, `D = D^*` and `C = B^*` within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        max_abs_diff(&self.a, &self.a.adjoint()) <= tol
            && max_abs_diff(&self.d, &self.d.adjoint()) <= tol
            && max_abs_diff(&self.c, &self.b.adjoint()) <= tol
    }
}

fn join(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let (p, m) = (a.nrows(), d.nrows());
    let mut out = CMatrix::zeros(p + m, p + m);
    out.view_mut((0, 0), (p, p)).copy_from(a);
    out.view_mut((0, p), (p, m)).copy_from(b);
    out.view_mut((p, 0), (m, p)).copy_from(c);
    out.view_mut((p, p), (m, m)).copy_from(d);
    out
}

fn shifted(m: &CMatrix, mu: C64) -> CMatrix {
    let mut s = m.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= mu;
    }
    s
}

/// 2-norm condition number from singular values.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// `(A - mu)^-1`, refused when the condition number exceeds
/// [`MAX_CONDITION`]. Hermitian `A` goes through its eigendecomposition.
pub fn shifted_inverse(a: &CMatrix, mu: C64) -> Result<CMatrix> {
    let scale = crate::linalg::max_abs(a).max(f64::MIN_POSITIVE);
    if max_abs_diff(a, &a.adjoint()) <= 1e-14 * scale {
        let (vals, vecs) = crate::linalg::hermitian_eigen(&crate::linalg::hermitian_part(a));
        let mods: Vec<f64> = vals.iter().map(|l| (C64::from(*l) - mu).norm()).collect();
        let (lo, hi) = mods.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| (lo.min(*s), hi.max(*s)));
        let cond = if lo == 0.0 { f64::INFINITY } else { hi / lo };
        if !(cond <= MAX_CONDITION) {
            return Err(Error::SingularBlock { cond });
        }
        let mut scaled = vecs.clone();
        for (j, l) in vals.iter().enumerate() {
            let d = C64::from(1.0) / (C64::from(*l) - mu);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= d;
            }
        }
        return Ok(matmul(&scaled, &vecs.adjoint()));
    }
    let am = shifted(a, mu);
    let cond = condition_number(&am);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::SingularBlock { cond });
    }
    am.try_inverse().ok_or(Error::SingularBlock { cond: f64::INFINITY })
}

/// `S(mu) = D - mu - C (A - mu)^-1 B`.
pub fn schur_complement(op: &BlockOperator, mu: C64) -> Result<CMatrix> {
    let inv = shifted_inverse(&op.a, mu)?;
    Ok(shifted(&op.d, mu) - matmul(&op.c, &matmul(&inv, &op.b)))
}

#[derive(Debug, Clone)]
pub struct FactoredOperator {
    /// `[[1, 0], [C (A - mu)^-1, 1]]`.
    pub r: CMatrix,
    /// `[[1, (A - mu)^-1 B], [0, 1]]`.
    pub t: CMatrix,
    pub a_shifted: CMatrix,
    pub s: CMatrix,
    pub mu: C64,
}

/// Frobenius-Schur factors of `op` around `mu`.
pub fn frobenius_schur(op: &BlockOperator, mu: C64) -> Result<FactoredOperator> {
    let (p, m) = (op.d_plus(), op.d_minus());
    let inv = shifted_inverse(&op.a, mu)?;
    let t_blk = matmul(&inv, &op.b);
    let r_blk = matmul(&op.c, &inv);
    let am = shifted(&op.a, mu);
    let s = shifted(&op.d, mu) - matmul(&op.c, &t_blk);
    let id_p = CMatrix::identity(p, p);
    let id_m = CMatrix::identity(m, m);
    let r = join(&id_p, &CMatrix::zeros(p, m), &r_blk, &id_m);
    let t = join(&id_p, &t_blk, &CMatrix::zeros(m, p), &id_m);
    Ok(FactoredOperator { r, t, a_shifted: am, s, mu })
}

impl FactoredOperator {
    pub fn d_plus(&self) -> usize {
        self.a_shifted.nrows()
    }

    pub fn middle(&self) -> CMatrix {
        let (p, m) = (self.d_plus(), self.s.nrows());
        join(&self.a_shifted, &CMatrix::zeros(p, m), &CMatrix::zeros(m, p), &self.s)
    }

    /// `R diag(A - mu, S) T + mu`.
    pub fn reconstruct(&self) -> CMatrix {
        let mut out = matmul(&matmul(&self.r, &self.middle()), &self.t);
        for i in 0..out.nrows() {
            out[(i, i)] += self.mu;
        }
        out
    }

    /// Unit-triangular inverse: negate the off-diagonal block.
    pub fn r_inverse(&self) -> CMatrix {
        negate_off_diagonal(&self.r, self.d_plus())
    }

    pub fn t_inverse(&self) -> CMatrix {
        negate_off_diagonal(&self.t, self.d_plus())
    }

    pub fn reconstruction_error(&self, original: &CMatrix) -> f64 {
        let scale = original.norm().max(f64::MIN_POSITIVE);
        (self.reconstruct() - original).norm() / scale
    }
}

fn negate_off_diagonal(m: &CMatrix, p: usize) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..n {
            if (i < p) != (j < p) {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    out
}

/// Summary of one factorization, as stored in reports.
#[derive(Debug, Clone, Serialize)]
pub struct FactorizationCheck {
    pub d_plus: usize,
    pub d_minus: usize,
    pub mu: [f64; 2],
    pub reconstruction_error: f64,
    pub r_inverse_error: f64,
    pub t_inverse_error: f64,
}

pub fn check_factorization(op: &BlockOperator, mu: C64) -> Result<FactorizationCheck> {
    let f = frobenius_schur(op, mu)?;
    let n = op.dim();
    let id = CMatrix::identity(n, n);
    Ok(FactorizationCheck {
        d_plus: op.d_plus(),
        d_minus: op.d_minus(),
        mu: [mu.re, mu.im],
        reconstruction_error: f.reconstruction_error(&op.to_dense()),
        r_inverse_error: max_abs_diff(&matmul(&f.r, &f.r_inverse()), &id),
        t_inverse_error: max_abs_diff(&matmul(&f.t, &f.t_inverse()), &id),
    })
}

/// Hermitian block operator with Gaussian entries, seeded.
pub fn random_hermitian_blocks(d_plus: usize, d_minus: usize, seed: u64) -> BlockOperator {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = d_plus + d_minus;
    let mut g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    g = (&g + g.adjoint()) * C64::from(0.5);
    BlockOperator::from_dense(&g, d_plus).expect("square by construction")
}
