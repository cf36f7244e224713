//! Calderon-Zygmund kernels `K_ij = d_i d_j (1/|y|)`, their eps-truncated
//! lattice convolutions, and the Riesz potential pair.
//!
//! Grid fields are periodic, so `f(r - y)` for `y` outside the box means the
//! periodic extension. The truncated convolution therefore sums `K` over
//! periodic images (cube-ordered, which makes every shell sum vanish by
//! cubic symmetry) and is evaluated as a circular convolution by FFT. The
//! Riesz convolution is the free-space one: the input is zero-padded to a
//! `2n` grid so no images enter.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::C64;
use crate::coupling::riesz_constant;
use crate::error::{Error, Result};
use crate::grid::{apply_scalar_multiplier, fft3, singular_weight, GridSpec, Multiplier, ScalarField};
use crate::linalg::pairwise_sum;
use crate::quadrature::gauss_legendre_on;

/// Image shells summed on each side by [`truncated_convolution`].
pub const DEFAULT_IMAGES: usize = 2;

/// `K_ij`, stored 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CZKernel {
    i: usize,
    j: usize,
}

impl CZKernel {
    /// `i`, `j` in 1..=3.
    pub fn new(i: usize, j: usize) -> Result<Self> {
        for (what, k) in [("kernel row", i), ("kernel column", j)] {
            if !(1..=3).contains(&k) {
                return Err(Error::IndexOutOfRange { what, index: k });
            }
        }
        Ok(CZKernel { i: i - 1, j: j - 1 })
    }

    /// The six distinct kernels `i <= j`.
    pub fn all() -> Vec<CZKernel> {
        let mut v = Vec::new();
        for i in 0..3 {
            for j in i..3 {
                v.push(CZKernel { i, j });
            }
        }
        v
    }

    /// 1-based indices.
    pub fn indices(&self) -> (usize, usize) {
        (self.i + 1, self.j + 1)
    }

    pub fn diagonal(&self) -> bool {
        self.i == self.j
    }

    pub fn label(&self) -> String {
        format!("K{}{}", self.i + 1, self.j + 1)
    }

    fn eval_unchecked(&self, y: [f64; 3]) -> f64 {
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        let r = r2.sqrt();
        let r3 = r2 * r;
        let v = 3.0 * y[self.i] * y[self.j] / (r3 * r2);
        if self.diagonal() {
            v - 1.0 / r3
        } else {
            v
        }
    }

    pub fn eval(&self, y: [f64; 3]) -> Result<f64> {
        if y == [0.0; 3] {
            return Err(Error::ZeroVector);
        }
        Ok(self.eval_unchecked(y))
    }

    /// `xi_i xi_j / |xi|^2` multiplier of the matching `T_ij`.
    pub fn multiplier(&self) -> Multiplier {
        Multiplier::cz_transform(self.i, self.j)
    }
}

pub fn kernel_eval(k: &CZKernel, y: [f64; 3]) -> Result<f64> {
    k.eval(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMoments {
    /// `(1/4 pi) int_S2 K`.
    pub mean: f64,
    /// `int_S2 |K(y) + K(-y)| log+ |K(y) + K(-y)|`.
    pub log_plus_moment: f64,
    /// `int_S2 |K|^2`.
    pub l2_moment: f64,
}

/// Product rule: Gauss-Legendre of order `quad_order` in `cos theta`,
/// trapezoid with `2 quad_order` nodes in `phi`.
pub fn sphere_moments(k: &CZKernel, quad_order: usize) -> Result<SphereMoments> {
    if quad_order < 8 {
        return Err(Error::OutOfRange { name: "quad_order", value: quad_order as f64, range: ">= 8" });
    }
    let rule = gauss_legendre_on(quad_order, -1.0, 1.0);
    let nphi = 2 * quad_order;
    let dphi = 2.0 * PI / nphi as f64;
    let (mut mean, mut logp, mut l2) = (Vec::new(), Vec::new(), Vec::new());
    for &(ct, w) in &rule {
        let st = (1.0 - ct * ct).sqrt();
        for m in 0..nphi {
            let phi = m as f64 * dphi;
            let y = [st * phi.cos(), st * phi.sin(), ct];
            let v = k.eval_unchecked(y);
            let s = (v + k.eval_unchecked(y.map(|c| -c))).abs();
            let wt = w * dphi;
            mean.push(wt * v);
            logp.push(if s > 1.0 { wt * s * s.ln() } else { 0.0 });
            l2.push(wt * v * v);
        }
    }
    Ok(SphereMoments {
        mean: pairwise_sum(&mean) / (4.0 * PI),
        log_plus_moment: pairwise_sum(&logp),
        l2_moment: pairwise_sum(&l2),
    })
}

fn check_eps(grid: &GridSpec, eps: f64) -> Result<f64> {
    let h = grid.h();
    if !(eps >= h * (1.0 - 1e-12)) {
        return Err(Error::EpsTooSmall { eps, h });
    }
    Ok((eps / h).powi(2) * (1.0 + 1e-12))
}

/// Kernel on the circular offset lattice.
///
/// Entry `m` sums `K(o h)` over lattice offsets `o = m (mod n)` inside the
/// symmetric cube `|o|_inf <= n/2 + images n`, skipping `|o h| <= eps`.
/// Offsets on the cube faces get weight 1/2 per face coordinate, so the
/// weighted offset set is invariant under the cubic group and the total
/// kernel sum vanishes exactly.
pub fn periodic_kernel(k: &CZKernel, grid: &GridSpec, eps: f64, images: usize) -> Result<Vec<f64>> {
    let cut = check_eps(grid, eps)?;
    let n = grid.n() as i64;
    let h = grid.h();
    let reach = n / 2 + images as i64 * n;
    let out = (0..grid.points())
        .into_par_iter()
        .map(|idx| {
            let m = grid.wavevector(idx);
            // Candidate offsets per axis with their face weights.
            let axis: Vec<Vec<(i64, f64)>> = m
                .iter()
                .map(|&ma| {
                    (-(images as i64) - 1..=images as i64 + 1)
                        .map(|t| ma + t * n)
                        .filter(|o| o.abs() <= reach)
                        .map(|o| (o, if o.abs() == reach { 0.5 } else { 1.0 }))
                        .collect()
                })
                .collect();
            let mut terms = Vec::with_capacity(axis.iter().map(Vec::len).product());
            for &(a, wa) in &axis[0] {
                for &(b, wb) in &axis[1] {
                    for &(c, wc) in &axis[2] {
                        if ((a * a + b * b + c * c) as f64) <= cut {
                            continue;
                        }
                        let y = [a as f64 * h, b as f64 * h, c as f64 * h];
                        terms.push(wa * wb * wc * k.eval_unchecked(y));
                    }
                }
            }
            pairwise_sum(&terms)
        })
        .collect();
    Ok(out)
}

/// `int_{|y| > eps} K(y) f(r - y) dy` as a lattice sum over the periodic
/// extension of `f`, with `images` shells of periodic copies of the kernel.
pub fn truncated_convolution_with(k: &CZKernel, f: &ScalarField, eps: f64, images: usize) -> Result<ScalarField> {
    let kern = periodic_kernel(k, &f.grid, eps, images)?;
    Ok(circular_convolution(&kern, f))
}

/// [`truncated_convolution_with`] using [`DEFAULT_IMAGES`].
pub fn truncated_convolution(k: &CZKernel, f: &ScalarField, eps: f64) -> Result<ScalarField> {
    truncated_convolution_with(k, f, eps, DEFAULT_IMAGES)
}

/// `h^3 sum_m kern[m] f[x - m]` on the torus.
pub fn circular_convolution(kern: &[f64], f: &ScalarField) -> ScalarField {
    let grid = f.grid;
    let mut kh: Vec<C64> = kern.iter().map(|v| C64::from(*v)).collect();
    fft3(&mut kh, grid.n(), false);
    let mut fh = f.spectrum();
    let vol = grid.cell_volume();
    fh.iter_mut().zip(&kh).for_each(|(a, b)| *a *= b * vol);
    ScalarField::from_spectrum(grid, fh)
}

/// Straight lattice sum with the same semantics as [`truncated_convolution`]
/// restricted to the primary cell (`images = 0`) and `|y| <= r_max`.
/// Quadratic cost; meant for small grids and cross-checks.
pub fn truncated_convolution_direct(k: &CZKernel, f: &ScalarField, eps: f64, r_max: f64) -> Result<ScalarField> {
    let grid = f.grid;
    let cut = check_eps(&grid, eps)?;
    let (n, h) = (grid.n() as i64, grid.h());
    let rmax2 = (r_max / h).powi(2) * (1.0 + 1e-12);
    let mut offsets = Vec::new();
    for a in -n / 2 + 1..n / 2 {
        for b in -n / 2 + 1..n / 2 {
            for c in -n / 2 + 1..n / 2 {
                let m2 = (a * a + b * b + c * c) as f64;
                if m2 > cut && m2 <= rmax2 {
                    let kv = k.eval_unchecked([a as f64 * h, b as f64 * h, c as f64 * h]);
                    offsets.push(([a, b, c], kv));
                }
            }
        }
    }
    let nn = grid.n();
    let vol = grid.cell_volume();
    let data = (0..grid.points())
        .into_par_iter()
        .map(|idx| {
            let x = grid.coords(idx);
            let terms: Vec<C64> = offsets
                .iter()
                .map(|(m, kv)| {
                    let src = [0, 1, 2].map(|a| (x[a] as i64 - m[a]).rem_euclid(nn as i64) as usize);
                    f.data[grid.index(src[0], src[1], src[2])] * *kv
                })
                .collect();
            crate::linalg::pairwise_sum_c(&terms) * vol
        })
        .collect();
    Ok(ScalarField { grid, data })
}

/// `T_ij f = delta_ij/3 f - (1/4 pi) (K_ij * f)_eps`.
pub fn tij_from_kernel(k: &CZKernel, f: &ScalarField, eps: f64) -> Result<ScalarField> {
    let conv = truncated_convolution(k, f, eps)?;
    tij_assemble(k, f, &conv)
}

fn tij_assemble(k: &CZKernel, f: &ScalarField, conv: &ScalarField) -> Result<ScalarField> {
    let d = if k.diagonal() { 1.0 / 3.0 } else { 0.0 };
    f.scaled(C64::from(d)).sub(&conv.scaled(C64::from(1.0 / (4.0 * PI))))
}

/// `T_ij f` through the exact multiplier `xi_i xi_j / |xi|^2`.
pub fn tij_from_multiplier(k: &CZKernel, f: &ScalarField) -> ScalarField {
    apply_scalar_multiplier(&k.multiplier(), f)
}

/// Relative L2 distance `|a - b| / |b|`.
pub fn relative_l2(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    Ok(a.sub(b)?.norm() / b.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelErrors {
    pub kernel: String,
    pub eps: Vec<f64>,
    /// `|T_kernel - T_multiplier| / |T_multiplier|` per eps.
    pub relative_error: Vec<f64>,
    /// Successive `|conv(eps_k) - conv(eps_k+1)|`, in input order.
    pub successive_differences: Vec<f64>,
}

/// Kernel-vs-multiplier errors for one kernel over `eps_list`.
pub fn kernel_errors(k: &CZKernel, f: &ScalarField, eps_list: &[f64]) -> Result<KernelErrors> {
    let reference = tij_from_multiplier(k, f);
    let base = periodic_kernel(k, &f.grid, f.grid.h(), DEFAULT_IMAGES)?;
    let mut errs = Vec::new();
    let mut convs = Vec::new();
    for &eps in eps_list {
        let kern = retruncate(k, &base, &f.grid, eps)?;
        let conv = circular_convolution(&kern, f);
        errs.push(relative_l2(&tij_assemble(k, f, &conv)?, &reference)?);
        convs.push(conv);
    }
    let diffs = convs.windows(2).map(|w| w[0].sub(&w[1]).map(|d| d.norm())).collect::<Result<Vec<_>>>()?;
    Ok(KernelErrors {
        kernel: k.label(),
        eps: eps_list.to_vec(),
        relative_error: errs,
        successive_differences: diffs,
    })
}

/// Turn a kernel built at `eps = h` into the one for a larger `eps` by
/// removing the primary offsets with `h < |o h| <= eps`.
fn retruncate(k: &CZKernel, base: &[f64], grid: &GridSpec, eps: f64) -> Result<Vec<f64>> {
    let cut = check_eps(grid, eps)?;
    let h_cut = check_eps(grid, grid.h())?;
    let h = grid.h();
    let n = grid.n() as i64;
    Ok(base
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let w = grid.wavevector(idx);
            let m2 = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64;
            // Primary offsets strictly inside the cell are the only ones this
            // close to the origin as long as eps < L/2.
            if m2 > h_cut && m2 <= cut && w.iter().all(|&c| c > -n / 2) {
                v - k.eval_unchecked(w.map(|c| c as f64 * h))
            } else {
                *v
            }
        })
        .collect())
}

/// Maximal-truncation constant: `|sup_eps |conv_eps|| / |f|`.
pub fn maximal_truncation(k: &CZKernel, f: &ScalarField, eps_list: &[f64]) -> Result<f64> {
    let mut sup = vec![0.0f64; f.grid.points()];
    for &eps in eps_list {
        let c = truncated_convolution(k, f, eps)?;
        for (s, z) in sup.iter_mut().zip(&c.data) {
            *s = s.max(z.norm());
        }
    }
    let sq: Vec<f64> = sup.iter().map(|s| s * s).collect();
    Ok((f.grid.cell_volume() * pairwise_sum(&sq)).sqrt() / f.norm())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 3.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange { name: "alpha", value: alpha, range: "(0, 3)" })
    }
}

/// `F^-1 [|xi|^-alpha f^]`, zero mode dropped.
pub fn riesz_multiplier(alpha: f64, f: &ScalarField) -> Result<ScalarField> {
    check_alpha(alpha)?;
    Ok(apply_scalar_multiplier(&Multiplier::riesz(alpha), f))
}

/// Cells with `|m|_inf <= NEAR_CELLS` use cell averages of the kernel.
const NEAR_CELLS: i64 = 2;

/// `(c_(3-alpha) / c_alpha) int |y|^(alpha-3) f(r - y) dy` in free space:
/// lattice sum on a zero-padded `2n` grid, with cell-averaged kernel weights
/// near the singularity.
pub fn riesz_potential(alpha: f64, f: &ScalarField) -> Result<ScalarField> {
    check_alpha(alpha)?;
    let grid = f.grid;
    let n = grid.n();
    let big = 2 * n;
    let h = grid.h();
    let s = 3.0 - alpha;
    let scale = riesz_constant(3.0 - alpha)? / riesz_constant(alpha)?;
    let big_grid = GridSpec::new(big, 2.0 * grid.box_len())?;
    let avg_rule = gauss_legendre_on(8, -0.5, 0.5);
    let origin = crate::quadrature::origin_cell_average(s, h, 8, |_| 1.0);
    let kern: Vec<C64> = (0..big_grid.points())
        .into_par_iter()
        .map(|idx| {
            let w = big_grid.wavevector(idx);
            if w.iter().any(|&c| c == -(big as i64) / 2) {
                return C64::default();
            }
            let inf = w.iter().map(|c| c.abs()).max().unwrap_or(0);
            let v = if inf == 0 {
                origin
            } else if inf <= NEAR_CELLS {
                let mut acc = 0.0;
                for &(a, wa) in &avg_rule {
                    for &(b, wb) in &avg_rule {
                        for &(c, wc) in &avg_rule {
                            let y = [(w[0] as f64 + a) * h, (w[1] as f64 + b) * h, (w[2] as f64 + c) * h];
                            let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
                            acc += wa * wb * wc * r.powf(-s);
                        }
                    }
                }
                acc
            } else {
                let r = ((w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64).sqrt() * h;
                r.powf(-s)
            };
            C64::from(v)
        })
        .collect();
    // Embed f in the low corner of the padded grid; the linear convolution
    // then sits in the same corner.
    let mut padded = vec![C64::default(); big_grid.points()];
    for idx in 0..grid.points() {
        let c = grid.coords(idx);
        padded[big_grid.index(c[0], c[1], c[2])] = f.data[idx];
    }
    let mut kh = kern;
    fft3(&mut kh, big, false);
    fft3(&mut padded, big, false);
    let vol = grid.cell_volume();
    padded.iter_mut().zip(&kh).for_each(|(a, b)| *a *= b * (vol * scale));
    fft3(&mut padded, big, true);
    let data = (0..grid.points())
        .map(|idx| {
            let c = grid.coords(idx);
            padded[big_grid.index(c[0], c[1], c[2])]
        })
        .collect();
    Ok(ScalarField { grid, data })
}

/// `|[W, T_ij] f|` with `W` the regularized `|r|^-s`, `T_ij` by multiplier.
pub fn weight_commutator(k: &CZKernel, s: f64, f: &ScalarField) -> Result<f64> {
    let w = singular_weight(&f.grid, s, |_| 1.0);
    let weigh = |g: &ScalarField| ScalarField {
        grid: g.grid,
        data: g.data.iter().zip(&w).map(|(z, w)| z * w).collect(),
    };
    let wt = weigh(&tij_from_multiplier(k, f));
    let tw = tij_from_multiplier(k, &weigh(f));
    Ok(wt.sub(&tw)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(i: usize, j: usize) -> CZKernel {
        CZKernel::new(i, j).unwrap()
    }

    #[test]
    fn closed_form_values() {
        let v = kernel_eval(&k(1, 2), [1.0, 1.0, 1.0]).unwrap();
        assert!((v - 3f64.powf(-1.5)).abs() < 1e-15);
        assert_eq!(kernel_eval(&k(1, 1), [0.0, 1.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(kernel_eval(&k(1, 1), [0.0; 3]), Err(Error::ZeroVector)));
        assert!(CZKernel::new(0, 1).is_err());
        assert!(CZKernel::new(1, 4).is_err());
        assert_eq!(CZKernel::all().len(), 6);
    }

    #[test]
    fn sphere_moments_match_exact_values() {
        // int (3 nu_1^2 - 1)^2 = 4 pi (9/5 - 2 + 1); int 9 nu_1^2 nu_2^2 = 12 pi / 5.
        let m11 = sphere_moments(&k(1, 1), 32).unwrap();
        assert!(m11.mean.abs() <= 1e-8);
        assert!((m11.l2_moment - 4.0 * PI * 0.8).abs() < 1e-12);
        let m12 = sphere_moments(&k(1, 2), 32).unwrap();
        assert!(m12.mean.abs() <= 1e-10);
        assert!((m12.l2_moment - 12.0 * PI / 5.0).abs() < 1e-12);
        for kk in CZKernel::all() {
            let m = sphere_moments(&kk, 32).unwrap();
            assert!(m.mean.abs() <= 1e-8);
            assert!(m.log_plus_moment.is_finite() && m.log_plus_moment <= m.l2_moment * 4.0);
        }
        assert!(sphere_moments(&k(1, 1), 4).is_err());
    }

    #[test]
    fn periodic_kernel_sums_to_zero() {
        let grid = GridSpec::new(8, 4.0).unwrap();
        for kk in CZKernel::all() {
            for images in 0..=2 {
                let kern = periodic_kernel(&kk, &grid, grid.h(), images).unwrap();
                let total: f64 = pairwise_sum(&kern);
                let scale: f64 = kern.iter().map(|v| v.abs()).sum();
                assert!(total.abs() <= 1e-13 * scale, "{} {images}: {total}", kk.label());
            }
        }
    }

    #[test]
    fn eps_below_spacing_rejected() {
        let grid = GridSpec::new(8, 4.0).unwrap();
        let f = ScalarField::gaussian(grid, [0.0; 3], 0.5);
        assert!(matches!(truncated_convolution(&k(1, 2), &f, 0.4), Err(Error::EpsTooSmall { .. })));
    }

    #[test]
    fn direct_sum_matches_fft_evaluation() {
        let grid = GridSpec::new(8, 4.0).unwrap();
        let f = ScalarField::from_real(grid, |r| (-(r[0] - 0.3).powi(2) - r[1] * r[1] - 2.0 * r[2] * r[2]).exp());
        for kk in [k(1, 1), k(2, 3)] {
            let mut kern = periodic_kernel(&kk, &grid, 2.0 * grid.h(), 0).unwrap();
            for idx in 0..grid.points() {
                if grid.coords(idx).contains(&(grid.n() / 2)) {
                    kern[idx] = 0.0;
                }
            }
            let fast = circular_convolution(&kern, &f);
            let slow = truncated_convolution_direct(&kk, &f, 2.0 * grid.h(), f64::INFINITY).unwrap();
            let d = fast.sub(&slow).unwrap().norm() / slow.norm();
            assert!(d < 1e-12, "{d}");
        }
    }

    #[test]
    fn constant_field_gives_zero() {
        let grid = GridSpec::new(16, 8.0).unwrap();
        let f = ScalarField::from_real(grid, |_| 1.0);
        let c = truncated_convolution(&k(1, 1), &f, grid.h()).unwrap();
        assert!(c.norm() <= 1e-3 * f.norm());
    }

    #[test]
    fn riesz_linearity_and_ranges() {
        let grid = GridSpec::new(16, 8.0).unwrap();
        let f = ScalarField::gaussian(grid, [0.0; 3], 1.0);
        let g = ScalarField::gaussian(grid, [0.5, 0.0, 0.0], 0.8);
        let s = C64::new(0.3, -1.2);
        for alpha in [1.0, 2.0] {
            let lhs = riesz_potential(alpha, &f.add(&g.scaled(s)).unwrap()).unwrap();
            let rhs = riesz_potential(alpha, &f).unwrap().add(&riesz_potential(alpha, &g).unwrap().scaled(s)).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * rhs.norm());
            let lhs = riesz_multiplier(alpha, &f.add(&g.scaled(s)).unwrap()).unwrap();
            let rhs = riesz_multiplier(alpha, &f).unwrap().add(&riesz_multiplier(alpha, &g).unwrap().scaled(s)).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm() <= 1e-12 * rhs.norm());
        }
        assert!(riesz_potential(3.0, &f).is_err());
        assert!(riesz_multiplier(0.0, &f).is_err());
    }

    fn laplacian_of_gaussian(grid: GridSpec, width: f64) -> ScalarField {
        ScalarField::from_real(grid, |r| {
            let r2 = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]) / (width * width);
            (r2 - 3.0) * (-r2 / 2.0).exp()
        })
    }

    fn centered(f: &ScalarField) -> ScalarField {
        let m = f.mean();
        ScalarField { grid: f.grid, data: f.data.iter().map(|z| z - m).collect() }
    }

    #[test]
    fn kernel_path_matches_multiplier() {
        let grid = GridSpec::new(64, 16.0).unwrap();
        let h = grid.h();
        let f = ScalarField::gaussian(grid, [0.0; 3], 1.0);
        for kk in CZKernel::all() {
            let e = kernel_errors(&kk, &f, &[4.0 * h, 2.0 * h, h]).unwrap();
            let r = &e.relative_error;
            assert!(r[2] <= 0.05, "{}: {r:?}", e.kernel);
            assert!(r[0] > r[1] && r[1] > r[2], "{}: {r:?}", e.kernel);
            let d = &e.successive_differences;
            assert!(d[1] < d[0], "{}: {d:?}", e.kernel);
        }
    }

    #[test]
    fn trace_is_identity() {
        let grid = GridSpec::new(32, 8.0).unwrap();
        let f = ScalarField::gaussian(grid, [0.2, 0.0, -0.1], 0.7);
        let mut sum = ScalarField { grid, data: vec![C64::default(); grid.points()] };
        let mut ksum = sum.clone();
        for i in 1..=3 {
            let kk = k(i, i);
            sum = sum.add(&tij_from_multiplier(&kk, &f)).unwrap();
            ksum = ksum.add(&tij_from_kernel(&kk, &f, grid.h()).unwrap()).unwrap();
        }
        // The multiplier path loses only the zero mode, where each T_ii is 1/3.
        assert!(relative_l2(&sum, &f).unwrap() <= 1e-12);
        assert!(relative_l2(&ksum, &f).unwrap() <= 0.05);
    }

    #[test]
    fn maximal_truncation_is_bounded() {
        let grid = GridSpec::new(32, 8.0).unwrap();
        let h = grid.h();
        let eps = [h, 2.0 * h, 4.0 * h, 8.0 * h];
        for (sigma, seed) in [(0.5, 0.0), (1.0, 0.3), (1.5, -0.4)] {
            let f = ScalarField::gaussian(grid, [seed, 0.0, 0.0], sigma);
            for kk in [k(1, 1), k(1, 2)] {
                let a = maximal_truncation(&kk, &f, &eps).unwrap();
                assert!(a.is_finite() && a > 0.0 && a < 20.0, "{a}");
            }
        }
    }

    #[test]
    fn riesz_paths_agree() {
        let grid = GridSpec::new(64, 16.0).unwrap();
        let f = laplacian_of_gaussian(grid, 1.0);
        for alpha in [1.0, 2.0] {
            let a = centered(&riesz_multiplier(alpha, &f).unwrap());
            let b = centered(&riesz_potential(alpha, &f).unwrap());
            let e = relative_l2(&b, &a).unwrap();
            assert!(e <= 0.02, "alpha {alpha}: {e}");
        }
    }

    #[test]
    fn riesz_scaling() {
        // R[f(./s)](x) = s^alpha R[f](x/s); compare where x/s is a grid point.
        let grid = GridSpec::new(64, 16.0).unwrap();
        let s = 2.0;
        let f1 = laplacian_of_gaussian(grid, 0.7);
        let f2 = laplacian_of_gaussian(grid, 0.7 * s);
        let half = grid.n() / 2;
        for alpha in [1.0, 2.0] {
            for path in [riesz_multiplier, riesz_potential] {
                let r1 = path(alpha, &f1).unwrap();
                let r2 = path(alpha, &f2).unwrap();
                // The dropped zero mode shifts each side by its own constant,
                // so compare fluctuations on the sampled points.
                let pairs: Vec<(C64, C64)> = (0..grid.points())
                    .filter_map(|idx| {
                        let c = grid.coords(idx);
                        c.iter().all(|&x| (x + half) % 2 == 0).then(|| {
                            let src = c.map(|x| (half as i64 + (x as i64 - half as i64) / 2) as usize);
                            (r2.data[idx], r1.data[grid.index(src[0], src[1], src[2])] * s.powf(alpha))
                        })
                    })
                    .collect();
                let len = pairs.len() as f64;
                let ml = pairs.iter().map(|p| p.0).sum::<C64>() / len;
                let mr = pairs.iter().map(|p| p.1).sum::<C64>() / len;
                let num: f64 = pairs.iter().map(|(l, r)| (l - ml - (r - mr)).norm_sqr()).sum();
                let den: f64 = pairs.iter().map(|(_, r)| (r - mr).norm_sqr()).sum();
                let e = (num / den).sqrt();
                assert!(e <= 0.05, "alpha {alpha}: {e}");
            }
        }
    }

    #[test]
    fn commutator_decays_under_gaussian_cutoff() {
        let grid = GridSpec::new(64, 4.0).unwrap();
        let f = ScalarField::gaussian(grid, [0.0; 3], 1.0);
        let kappa = 1.0;
        let norms: Vec<f64> = (1..=6)
            .map(|n| {
                let a = 2f64.powi(n) * PI;
                let g = ScalarField::from_real(grid, |r| {
                    (-a * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2])).exp()
                });
                let g = ScalarField { grid, data: g.data.iter().zip(&f.data).map(|(x, y)| x * y).collect() };
                weight_commutator(&k(1, 2), kappa / 2.0, &g).unwrap()
            })
            .collect();
        for w in norms.windows(2) {
            assert!(w[1] <= 1.1 * w[0], "{norms:?}");
        }
        assert!(norms[5] < norms[0]);
    }

    proptest! {
        #[test]
        fn homogeneity_and_parity(
            y in proptest::array::uniform3(-3.0f64..3.0),
            lam in 0.1f64..10.0,
            i in 1usize..=3,
            j in 1usize..=3,
        ) {
            prop_assume!(y.iter().map(|c| c * c).sum::<f64>() > 1e-4);
            let kk = k(i, j);
            let v = kk.eval(y).unwrap();
            let scaled = kk.eval(y.map(|c| c * lam)).unwrap();
            prop_assert!((scaled - v * lam.powi(-3)).abs() <= 1e-12 * v.abs().max(1e-300) + 1e-14);
            prop_assert_eq!(kk.eval(y.map(|c| -c)).unwrap(), v);
            // Symmetric in the index pair.
            prop_assert!((k(j, i).eval(y).unwrap() - v).abs() <= 1e-15 * v.abs().max(1.0));
        }
    }
}
