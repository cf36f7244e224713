//! Gauss-Legendre rules and the singular origin-cell average used to
//! regularize `|r|^-s` weights on a lattice.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(xi, wi)| (mid + half * xi, half * wi)).collect()
}

/// Average of `|r|^-s * g(|r|)` over the cube `[-h/2, h/2]^3`, for `0 <= s < 3`.
///
/// The cube splits into octants, each octant into three pyramids with apex at
/// the origin. On a pyramid, `x = a u`, `y = a u v`, `z = a u w` (`a = h/2`)
/// gives Jacobian `a^3 u^2` and `|r| = a u rho(v, w)`. The radial weight
/// `u^(2-s)` is absorbed by `t = u^(3-s)`, leaving a smooth integrand for an
/// `order^3` product rule in `(t, v, w)`.
pub fn origin_cell_average(s: f64, h: f64, order: usize, g: impl Fn(f64) -> f64) -> f64 {
    assert!((0.0..3.0).contains(&s), "exponent must lie in [0, 3)");
    let a = 0.5 * h;
    let e = 3.0 - s;
    let rule = gauss_legendre_on(order, 0.0, 1.0);
    let mut pyramid = 0.0;
    for &(v, wv) in &rule {
        for &(w, ww) in &rule {
            let rho = (1.0 + v * v + w * w).sqrt();
            let mut radial = 0.0;
            for &(t, wt) in &rule {
                let u = t.powf(1.0 / e);
                radial += wt * g(a * u * rho);
            }
            pyramid += wv * ww * rho.powf(-s) * radial / e;
        }
    }
    // 8 octants x 3 pyramids, each a^(3-s) * pyramid, divided by h^3.
    24.0 * a.powf(e) * pyramid / (h * h * h)
}
