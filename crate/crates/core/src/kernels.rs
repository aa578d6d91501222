//! Helmholtz and Navier fundamental solutions, their tractions, and
//! layer-potential evaluation away from the boundary.
//!
//! Both kernels are radial: `Phi(x, y) = a(r) I + b(r) rr^T` with
//! `r = |x - y|` and `rr = (x - y)/r`. In the plane, with `z_a = k_a r`,
//!
//! ```text
//! a = i/(4 mu) [H0(z_s) - H1(z_s)/z_s + c H1(z_p)/z_p]
//! b = i/(4 mu) [H2(z_s) - c H2(z_p)],        c = k_p^2 / k_s^2
//! ```
//!
//! The `z_s` terms form the transversal part and the `z_p` terms the
//! longitudinal part of the kernel. The `1/r^2` poles of the two parts cancel;
//! the combined kernel is evaluated from pole-free Hankel combinations so that
//! it stays accurate as `r -> 0`.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom2::Vec2;
use crate::geometry::BoundaryCurve;
use crate::medium::ElasticMedium;
use crate::special::{hankel1_012, hankel1_012_regular};

pub type M2 = [[Complex64; 2]; 2];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which part of the Navier kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Both,
    /// Longitudinal (curl-free) part.
    P,
    /// Transversal (divergence-free) part.
    S,
}

/// Full kernel, or the coefficient of `ln r` in its expansion at `r = 0`
/// (every `H_n` replaced by `(2i/pi) J_n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Full,
    LogCoefficient,
}

/// Radial coefficients of a kernel and their `r`-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialCoefs {
    pub a: Complex64,
    pub b: Complex64,
    pub da: Complex64,
    pub db: Complex64,
}

/// Small value type holding a 2x2 or 3x3 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMatrix {
    dim: usize,
    m: [[Complex64; 3]; 3],
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        assert!(i < self.dim && j < self.dim);
        self.m[i][j]
    }
    pub fn as_2x2(&self) -> Option<M2> {
        (self.dim == 2).then(|| [[self.m[0][0], self.m[0][1]], [self.m[1][0], self.m[1][1]]])
    }
    fn from_2x2(a: M2) -> Self {
        let mut m = [[ZERO; 3]; 3];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][j];
            }
        }
        Self { dim: 2, m }
    }
}

fn check_dim(n: u32, x: &[f64], y: &[f64]) -> Result<usize> {
    if n != 2 && n != 3 {
        return Err(Error::Domain(format!("kernels are available for N = 2, 3, got {n}")));
    }
    let d = n as usize;
    if x.len() != d || y.len() != d {
        return Err(Error::Domain(format!("points must have {d} coordinates")));
    }
    Ok(d)
}

fn separation(x: &[f64], y: &[f64]) -> Result<(f64, [f64; 3])> {
    let mut v = [0.0; 3];
    for k in 0..x.len() {
        v[k] = x[k] - y[k];
    }
    let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if r == 0.0 {
        return Err(Error::Singularity);
    }
    for c in v.iter_mut() {
        *c /= r;
    }
    Ok((r, v))
}

/// Helmholtz fundamental solution: `(i/4) H0(k r)` in the plane,
/// `e^{ikr} / (4 pi r)` in space.
pub fn helmholtz_phi(k: f64, x: &[f64], y: &[f64], n: u32) -> Result<Complex64> {
    check_dim(n, x, y)?;
    if !(k > 0.0) {
        return Err(Error::Domain(format!("wave number must be positive, got {k}")));
    }
    let (r, _) = separation(x, y)?;
    Ok(if n == 2 { 0.25 * I * hankel1_012(k * r)[0] } else { Complex64::from_polar(1.0 / (4.0 * PI * r), k * r) })
}

/// `f(r) = e^{ikr}/(4 pi r)` and its first three derivatives.
fn spherical_wave(k: f64, r: f64) -> [Complex64; 4] {
    let e = Complex64::from_polar(1.0 / (4.0 * PI), k * r);
    let ikr = I * (k * r);
    let kr2 = (k * r) * (k * r);
    [
        e / r,
        e * (ikr - 1.0) / (r * r),
        e * (2.0 - 2.0 * ikr - kr2) / (r * r * r),
        e * (-6.0 + 6.0 * ikr + 3.0 * kr2 - ikr * kr2) / (r * r * r * r),
    ]
}

/// Material constants used by the plane kernels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel2d {
    pub lambda: f64,
    pub mu: f64,
    pub kp: f64,
    pub ks: f64,
    /// `k_p^2 / k_s^2 = mu / (lambda + 2 mu)`.
    pub c: f64,
}

impl Kernel2d {
    pub fn new(medium: &ElasticMedium) -> Self {
        let w = medium.wavenumbers();
        Self {
            lambda: medium.lambda(),
            mu: medium.mu(),
            kp: w.omega_p,
            ks: w.omega_s,
            c: medium.mu() / (medium.lambda() + 2.0 * medium.mu()),
        }
    }

    /// Radial coefficients at `r > 0`.
    pub fn coefs(&self, r: f64, part: Part, flavor: Flavor) -> RadialCoefs {
        let hs = if part != Part::P { hankel1_012_regular(self.ks * r) } else { [ZERO; 3] };
        let hp = if part != Part::S { hankel1_012_regular(self.kp * r) } else { [ZERO; 3] };
        self.coefs_from(r, part, flavor, &hs, &hp)
    }

    /// Full and log-coefficient versions of the whole kernel, sharing the
    /// Hankel evaluations.
    pub fn coefs_full_and_log(&self, r: f64) -> (RadialCoefs, RadialCoefs) {
        let hs = hankel1_012_regular(self.ks * r);
        let hp = hankel1_012_regular(self.kp * r);
        (self.coefs_from(r, Part::Both, Flavor::Full, &hs, &hp), self.coefs_from(r, Part::Both, Flavor::LogCoefficient, &hs, &hp))
    }

    /// `hs`, `hp`: pole-free Hankel triples at `k_s r` and `k_p r`.
    fn coefs_from(&self, r: f64, part: Part, flavor: Flavor, hs: &[Complex64; 3], hp: &[Complex64; 3]) -> RadialCoefs {
        let (ks, kp, c) = (self.ks, self.kp, self.c);
        let zs = ks * r;
        let zp = kp * r;
        let pre = I / (4.0 * self.mu);
        let full = flavor == Flavor::Full;
        let load = |h: &[Complex64; 3], z: f64| -> ([Complex64; 3], Complex64) {
            if full {
                // Unregularised H1 as well: its pole is a genuine 1/r term of a', b'.
                (*h, h[1] - I * (FRAC_2_PI / z))
            } else {
                let j = [h[0].re, h[1].re, h[2].re].map(|v| I * FRAC_2_PI * v);
                (j, j[1])
            }
        };
        let mut out = RadialCoefs { a: ZERO, b: ZERO, da: ZERO, db: ZERO };
        let with_poles = full && part != Part::Both;
        let pole = |p: f64| if with_poles { I * (p * FRAC_2_PI) } else { ZERO };
        if part != Part::P {
            let (h, h1) = load(hs, zs);
            out.a += h[0] - h[1] / zs + pole(1.0 / (zs * zs));
            out.b += h[2] + pole(-2.0 / (zs * zs));
            out.da += -ks * h1 + ks * h[2] / zs + pole(-2.0 * ks / (zs * zs * zs));
            out.db += ks * (h1 - 2.0 * h[2] / zs) + pole(4.0 * ks / (zs * zs * zs));
        }
        if part != Part::S {
            let (h, h1) = load(hp, zp);
            out.a += c * h[1] / zp + pole(-c / (zp * zp));
            out.b += -c * h[2] + pole(2.0 * c / (zp * zp));
            out.da += -c * kp * h[2] / zp + pole(2.0 * c * kp / (zp * zp * zp));
            out.db += -c * kp * (h1 - 2.0 * h[2] / zp) + pole(-4.0 * c * kp / (zp * zp * zp));
        }
        RadialCoefs { a: pre * out.a, b: pre * out.b, da: pre * out.da, db: pre * out.db }
    }

    /// `Phi` from precomputed coefficients; `e` is the unit separation.
    #[inline]
    pub fn phi_from(&self, k: &RadialCoefs, e: Vec2) -> M2 {
        matrix_ab(k.a, k.b, e)
    }

    /// Traction from precomputed coefficients.
    #[inline]
    pub fn traction_from(&self, k: &RadialCoefs, r: f64, e: Vec2, nu: Vec2) -> M2 {
        let t = traction_from_coefs(k, r, &e, &nu, self.lambda, self.mu);
        [[t[0][0], t[0][1]], [t[1][0], t[1][1]]]
    }

    /// `Phi(x, y)` for `d = x - y != 0`.
    #[inline]
    pub fn phi(&self, d: Vec2, part: Part, flavor: Flavor) -> M2 {
        let r = d[0].hypot(d[1]);
        let e = [d[0] / r, d[1] / r];
        let k = self.coefs(r, part, flavor);
        matrix_ab(k.a, k.b, e)
    }

    /// Row-wise traction `[T_y Phi(x, y)]` for `d = x - y != 0` and unit
    /// normal `nu` at `y`.
    #[inline]
    pub fn traction(&self, d: Vec2, nu: Vec2, part: Part, flavor: Flavor) -> M2 {
        let r = d[0].hypot(d[1]);
        let e = [d[0] / r, d[1] / r];
        let k = self.coefs(r, part, flavor);
        let t = traction_from_coefs(&k, r, &e, &nu, self.lambda, self.mu);
        [[t[0][0], t[0][1]], [t[1][0], t[1][1]]]
    }
}

fn matrix_ab(a: Complex64, b: Complex64, e: Vec2) -> M2 {
    [[a + b * e[0] * e[0], b * e[0] * e[1]], [b * e[1] * e[0], a + b * e[1] * e[1]]]
}

/// `T_ik = lambda (sum_j G_ijj) nu_k + mu sum_l (G_ikl + G_ilk) nu_l`, where
/// `G_ijl = d Phi_ij / d y_l
///        = -[a' e_l d_ij + b' e_l e_i e_j + (b/r)(d_il e_j + d_jl e_i - 2 e_i e_j e_l)]`.
fn traction_from_coefs(k: &RadialCoefs, r: f64, e: &[f64], nu: &[f64], lambda: f64, mu: f64) -> [[Complex64; 3]; 3] {
    let dim = e.len();
    let q = k.b / r;
    let en: f64 = e.iter().zip(nu).map(|(a, b)| a * b).sum();
    let div = lambda * (k.da + k.db + (dim as f64 - 1.0) * q);
    let diag = mu * (k.da + q) * en;
    let ee = mu * (2.0 * k.db - 4.0 * q) * en;
    let nue = mu * (k.da + q);
    let enu = div + 2.0 * mu * q;
    let mut t = [[ZERO; 3]; 3];
    for i in 0..dim {
        for kk in 0..dim {
            let mut s = ee * (e[i] * e[kk]) + nue * (nu[i] * e[kk]) + enu * (e[i] * nu[kk]);
            if i == kk {
                s += diag;
            }
            t[i][kk] = -s;
        }
    }
    t
}

fn coefs_3d(medium: &ElasticMedium, r: f64) -> RadialCoefs {
    let w = medium.wavenumbers();
    let fs = spherical_wave(w.omega_s, r);
    let fp = spherical_wave(w.omega_p, r);
    let rw2 = medium.rho_omega2();
    let g: Vec<Complex64> = (0..4).map(|i| fs[i] - fp[i]).collect();
    RadialCoefs {
        a: fs[0] / medium.mu() + g[1] / (r * rw2),
        b: (g[2] - g[1] / r) / rw2,
        da: fs[1] / medium.mu() + (g[2] / r - g[1] / (r * r)) / rw2,
        db: (g[3] - g[2] / r + g[1] / (r * r)) / rw2,
    }
}

/// Navier fundamental solution `Phi(x, y)`.
pub fn navier_phi(medium: &ElasticMedium, x: &[f64], y: &[f64], n: u32) -> Result<KernelMatrix> {
    let dim = check_dim(n, x, y)?;
    let (r, e) = separation(x, y)?;
    if dim == 2 {
        let k = Kernel2d::new(medium);
        return Ok(KernelMatrix::from_2x2(k.phi([x[0] - y[0], x[1] - y[1]], Part::Both, Flavor::Full)));
    }
    let k = coefs_3d(medium, r);
    let mut m = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = k.b * e[i] * e[j] + if i == j { k.a } else { ZERO };
        }
    }
    Ok(KernelMatrix { dim: 3, m })
}

/// Row-wise traction `[T_y Phi(x, y)]` with unit normal `nu` at `y`.
pub fn traction_kernel(medium: &ElasticMedium, y: &[f64], nu: &[f64], x: &[f64]) -> Result<KernelMatrix> {
    let n = y.len() as u32;
    let dim = check_dim(n, x, y)?;
    if nu.len() != dim {
        return Err(Error::Domain(format!("normal must have {dim} components")));
    }
    let nn = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (nn - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("normal must be a unit vector, has norm {nn}")));
    }
    let (r, e) = separation(x, y)?;
    let coefs = if dim == 2 { Kernel2d::new(medium).coefs(r, Part::Both, Flavor::Full) } else { coefs_3d(medium, r) };
    let m = traction_from_coefs(&coefs, r, &e[..dim], nu, medium.lambda(), medium.mu());
    Ok(KernelMatrix { dim, m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Single,
    Double,
}

/// Nodes of the trapezoidal rule on a curve: points, outward normals and
/// weights `|gamma'(t_j)| 2 pi / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    pub t: Vec<f64>,
    pub points: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub speeds: Vec<f64>,
    pub weights: Vec<f64>,
    /// Largest distance between consecutive nodes.
    pub spacing: f64,
}

impl CurveSamples {
    pub fn new(curve: &BoundaryCurve, n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let t: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
        let evals: Vec<[Vec2; 3]> = t.iter().map(|&s| curve.eval(s)).collect();
        let points: Vec<Vec2> = evals.iter().map(|e| e[0]).collect();
        let speeds: Vec<f64> = evals.iter().map(|e| e[1][0].hypot(e[1][1])).collect();
        let normals = evals.iter().zip(&speeds).map(|(e, s)| [e[1][1] / s, -e[1][0] / s]).collect();
        let weights = speeds.iter().map(|s| s * h).collect();
        let spacing = (0..n)
            .map(|j| {
                let (a, b) = (points[j], points[(j + 1) % n]);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max);
        Self { t, points, normals, speeds, weights, spacing }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Checks that `x` is exterior to `curve` and at least one node spacing away.
pub fn check_target(curve: &BoundaryCurve, samples: &CurveSamples, x: Vec2) -> Result<()> {
    if curve.contains(x) {
        return Err(Error::InteriorPoint);
    }
    let distance = curve.distance_to(x);
    if distance < samples.spacing {
        return Err(Error::NearSingular { distance, spacing: samples.spacing });
    }
    Ok(())
}

/// Trapezoidal single- or double-layer potential of `density` (one complex
/// 2-vector per node) at `x`, restricted to one part of the kernel.
pub fn layer_potential_part(
    kind: LayerKind,
    part: Part,
    kernel: &Kernel2d,
    samples: &CurveSamples,
    density: &[[Complex64; 2]],
    x: Vec2,
) -> [Complex64; 2] {
    let mut out = [ZERO; 2];
    for j in 0..samples.len() {
        let y = samples.points[j];
        let d = [x[0] - y[0], x[1] - y[1]];
        let m = match kind {
            LayerKind::Single => kernel.phi(d, part, Flavor::Full),
            LayerKind::Double => kernel.traction(d, samples.normals[j], part, Flavor::Full),
        };
        let w = samples.weights[j];
        let f = density[j];
        out[0] += w * (m[0][0] * f[0] + m[0][1] * f[1]);
        out[1] += w * (m[1][0] * f[0] + m[1][1] * f[1]);
    }
    out
}

/// Single- or double-layer potential of a nodal density at an exterior point
/// `x`. Targets closer to the curve than one node spacing are refused.
pub fn layer_potential_eval(
    kind: LayerKind,
    medium: &ElasticMedium,
    curve: &BoundaryCurve,
    density: &[[Complex64; 2]],
    x: Vec2,
) -> Result<[Complex64; 2]> {
    let samples = CurveSamples::new(curve, density.len());
    check_target(curve, &samples, x)?;
    Ok(layer_potential_part(kind, Part::Both, &Kernel2d::new(medium), &samples, density, x))
}

/// `sum_k m_ik v_k`.
#[inline]
pub fn apply(m: &M2, v: &[Complex64; 2]) -> [Complex64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

/// Traction `sigma(u) nu` of a field from its Jacobian `grad[i][l] = d u_i / d x_l`.
pub fn traction_of_gradient(grad: &[[Complex64; 2]; 2], nu: Vec2, lambda: f64, mu: f64) -> [Complex64; 2] {
    let div = grad[0][0] + grad[1][1];
    let mut t = [ZERO; 2];
    for k in 0..2 {
        t[k] = lambda * div * nu[k];
        for l in 0..2 {
            t[k] += mu * (grad[k][l] + grad[l][k]) * nu[l];
        }
    }
    t
}
