//! Dense helpers: deterministic reductions, Hermitian eigen-decomposition,
//! norms and inertia.

use nalgebra::DMatrix;

use crate::clifford::C64;

pub type CMatrix = DMatrix<C64>;

const LEAF: usize = 32;

/// Pairwise (tree) summation with a fixed split, independent of threading.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

pub fn pairwise_sum_c(xs: &[C64]) -> C64 {
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum_c(a) + pairwise_sum_c(b)
    }
}

/// `a b` through four real products, which use the blocked f64 kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    CMatrix::from_fn(a.nrows(), b.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Average with the adjoint; removes rounding-level asymmetry.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (ascending) and matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `max_i |H v_i - lambda_i v_i|` over eigenpairs.
pub fn eigen_residual(m: &CMatrix, values: &[f64], vectors: &CMatrix) -> f64 {
    let hv = matmul(m, vectors);
    let mut worst: f64 = 0.0;
    for (c, lam) in values.iter().enumerate() {
        let r = hv.column(c) - vectors.column(c) * C64::from(*lam);
        worst = worst.max(r.norm());
    }
    worst
}

/// Spectral norm of a Hermitian matrix (largest eigenvalue modulus).
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0, |a, l| a.max(l.abs()))
}

/// Matrix 1-norm (largest column sum).
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Counts of positive, negative and zero eigenvalues (|lambda| <= tol is zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn of_values(values: &[f64], tol: f64) -> Self {
        let mut i = Inertia { positive: 0, negative: 0, zero: 0 };
        for v in values {
            if *v > tol {
                i.positive += 1;
            } else if *v < -tol {
                i.negative += 1;
            } else {
                i.zero += 1;
            }
        }
        i
    }

    pub fn of(m: &CMatrix, tol: f64) -> Self {
        Self::of_values(&hermitian_eigenvalues(m), tol)
    }
}

impl std::ops::Add for Inertia {
    type Output = Inertia;
    fn add(self, o: Inertia) -> Inertia {
        Inertia {
            positive: self.positive + o.positive,
            negative: self.negative + o.negative,
            zero: self.zero + o.zero,
        }
    }
}

/// Eigenvalue multisets compared after sorting; `None` on length mismatch.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Some(x.iter().zip(&y).fold(0.0, |m, (p, q)| m.max((p - q).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_naive_product() {
        let a = CMatrix::from_fn(7, 5, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64).sin()));
        let b = CMatrix::from_fn(5, 4, |i, j| C64::new(((i + 2 * j) as f64).cos(), 0.3 * j as f64 - i as f64));
        assert!(max_abs_diff(&matmul(&a, &b), &(&a * &b)) <= 1e-13);
    }

    #[test]
    fn pairwise_matches_naive_on_exact_values() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499500.0);
        let cs: Vec<C64> = (0..100).map(|i| C64::new(i as f64, -(i as f64))).collect();
        assert_eq!(pairwise_sum_c(&cs), C64::new(4950.0, -4950.0));
    }

    #[test]
    fn eigen_sorted_with_small_residual() {
        let m = CMatrix::from_fn(6, 6, |i, j| {
            let (a, b) = (i as f64, j as f64);
            C64::new((a + b).cos(), if i == j { 0.0 } else { (a - b).sin() })
        });
        let h = hermitian_part(&m);
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(eigen_residual(&h, &vals, &vecs) < 1e-12);
        let only = hermitian_eigenvalues(&h);
        assert!(multiset_distance(&vals, &only).unwrap() < 1e-12);
    }

    #[test]
    fn inertia_counts() {
        let i = Inertia::of_values(&[-1.0, 0.0, 1e-15, 2.0], 1e-12);
        assert_eq!(i, Inertia { positive: 1, negative: 1, zero: 2 });
    }
}
