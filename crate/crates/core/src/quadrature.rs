//! Quadrature rules: Gauss-Legendre, and the trigonometric rules on
//! equispaced periodic grids used by the Nyström discretisation.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `P_n(z)` and `P_n'(z)` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(&xi, &wi)| (mid + half * xi, half * wi)).collect()
}

/// Composite Gauss-Legendre rule with `panels` equal panels on `[a, b]`.
pub fn composite_gauss(order: usize, panels: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let (x, w) = gauss_legendre(order);
    let mut out = Vec::with_capacity(order * panels);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// `R(u)`: the weight of node `t_j` in the rule for
/// `int_0^{2pi} ln(4 sin^2((t - s)/2)) f(s) ds` on `n` equispaced nodes
/// (`n` even), with `u = t - t_j`. Exact for trigonometric polynomials of
/// degree below `n/2`.
pub fn log_weight(n: usize, u: f64) -> f64 {
    let half = n / 2;
    let nf = half as f64;
    let mut s = 0.0;
    for m in 1..half {
        s += (m as f64 * u).cos() / m as f64;
    }
    -2.0 * PI / nf * s - PI / (nf * nf) * (nf * u).cos()
}

/// `C(u)`: node weight for the principal value
/// `int_0^{2pi} (1/2) cot((s - t)/2) f(s) ds`, `u = t - t_j`.
pub fn cauchy_weight(n: usize, u: f64) -> f64 {
    let half = n / 2;
    let mut s = 0.0;
    for m in 1..half {
        s += (m as f64 * u).sin();
    }
    s += 0.5 * (half as f64 * u).sin();
    -2.0 * PI / n as f64 * s
}

/// Lagrange basis of trigonometric interpolation on `n` equispaced nodes,
/// `u = t - t_j`.
pub fn trig_basis(n: usize, u: f64) -> f64 {
    let half = n / 2;
    let mut s = 1.0;
    for m in 1..half {
        s += 2.0 * (m as f64 * u).cos();
    }
    s += (half as f64 * u).cos();
    s / n as f64
}

fn node_offsets(n: usize, t: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| t - 2.0 * PI * j as f64 / n as f64)
}

/// `[R(t - t_j)]_j`.
pub fn log_weights(n: usize, t: f64) -> Vec<f64> {
    node_offsets(n, t).map(|u| log_weight(n, u)).collect()
}

/// `[C(t - t_j)]_j`.
pub fn cauchy_weights(n: usize, t: f64) -> Vec<f64> {
    node_offsets(n, t).map(|u| cauchy_weight(n, u)).collect()
}

/// `[L(t - t_j)]_j`.
pub fn trig_interpolation_weights(n: usize, t: f64) -> Vec<f64> {
    node_offsets(n, t).map(|u| trig_basis(n, u)).collect()
}
