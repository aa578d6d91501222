//! Numerical checks of the Friedrichs, Maz'ya and first Korn inequalities,
//! the three-spheres interpolation exponent, and propagation of smallness
//! along chains of balls.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom2::{norm, sub, Vec2};
use crate::geometry::BoundaryCurve;
use crate::medium::isoperimetric_constant;
use crate::par;
use crate::quadrature::gauss_interval;
use crate::special::bessel_j_upto;

/// Relative slack allowed when an inequality is tested.
pub const SLACK: f64 = 1e-8;
/// Relative agreement between a panel and its two halves accepted by the
/// adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-8;

type Rule = Vec<(Vec2, f64)>;

/// Planar test domains with their quadrature rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestDomain {
    Disc {
        radius: f64,
    },
    /// Axis-aligned square `[-side/2, side/2]^2`.
    Square {
        side: f64,
    },
    Annulus {
        inner: f64,
        outer: f64,
    },
    /// `r < radius (1 + delta cos(m theta))`.
    PerturbedDisc {
        radius: f64,
        delta: f64,
        m: u32,
    },
}

impl TestDomain {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TestDomain::Disc { radius } => radius > 0.0 && radius.is_finite(),
            TestDomain::Square { side } => side > 0.0 && side.is_finite(),
            TestDomain::Annulus { inner, outer } => inner > 0.0 && outer > inner && outer.is_finite(),
            TestDomain::PerturbedDisc { radius, delta, .. } => radius > 0.0 && radius.is_finite() && delta.abs() < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("domain", format!("invalid test domain {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestDomain::Disc { .. } => "disc",
            TestDomain::Square { .. } => "square",
            TestDomain::Annulus { .. } => "annulus",
            TestDomain::PerturbedDisc { .. } => "perturbed_disc",
        }
    }

    /// Closed-form area.
    pub fn area(&self) -> f64 {
        match *self {
            TestDomain::Disc { radius } => PI * radius * radius,
            TestDomain::Square { side } => side * side,
            TestDomain::Annulus { inner, outer } => PI * (outer * outer - inner * inner),
            TestDomain::PerturbedDisc { radius, delta, m } => {
                let extra = if m == 0 { 2.0 * delta + delta * delta } else { 0.5 * delta * delta };
                PI * radius * radius * (1.0 + extra)
            }
        }
    }

    /// Length of the boundary, by quadrature where no closed form exists.
    pub fn boundary_measure(&self) -> f64 {
        match *self {
            TestDomain::Disc { radius } => 2.0 * PI * radius,
            TestDomain::Square { side } => 4.0 * side,
            TestDomain::Annulus { inner, outer } => 2.0 * PI * (inner + outer),
            TestDomain::PerturbedDisc { .. } => self.boundary_rule(8).iter().map(|p| p.1).sum(),
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        let r = norm(x);
        match *self {
            TestDomain::Disc { radius } => r < radius,
            TestDomain::Square { side } => x[0].abs() < side / 2.0 && x[1].abs() < side / 2.0,
            TestDomain::Annulus { inner, outer } => r > inner && r < outer,
            TestDomain::PerturbedDisc { radius, delta, m } => {
                let th = x[1].atan2(x[0]);
                r < radius * (1.0 + delta * (m as f64 * th).cos())
            }
        }
    }

    /// Whether the closed ball `B(c, rho)` lies inside the domain.
    pub fn contains_ball(&self, c: Vec2, rho: f64) -> bool {
        let r = norm(c);
        match *self {
            TestDomain::Disc { radius } => r + rho < radius,
            TestDomain::Square { side } => c[0].abs() + rho < side / 2.0 && c[1].abs() + rho < side / 2.0,
            TestDomain::Annulus { inner, outer } => r - rho > inner && r + rho < outer,
            TestDomain::PerturbedDisc { .. } => self.contains(c) && self.boundary_rule(64).iter().all(|(p, _)| norm(sub(*p, c)) > rho),
        }
    }

    fn rho(&self, th: f64) -> (f64, f64) {
        match *self {
            TestDomain::PerturbedDisc { radius, delta, m } => {
                let mf = m as f64;
                (radius * (1.0 + delta * (mf * th).cos()), -radius * delta * mf * (mf * th).sin())
            }
            TestDomain::Disc { radius } => (radius, 0.0),
            _ => unreachable!("star-shaped rule only"),
        }
    }

    /// Interior rule at resolution `level`.
    pub fn interior_rule(&self, level: usize) -> Rule {
        let nr = 12 * level;
        let nt = 32 * level;
        let mut out = Vec::new();
        match *self {
            TestDomain::Square { side } => {
                let g = panel_rule(nr, level, -side / 2.0, side / 2.0);
                for &(x, wx) in &g {
                    for &(y, wy) in &g {
                        out.push(([x, y], wx * wy));
                    }
                }
            }
            TestDomain::Annulus { inner, outer } => {
                let g = gauss_interval(nr, inner, outer);
                for k in 0..nt {
                    let th = 2.0 * PI * k as f64 / nt as f64;
                    for &(r, w) in &g {
                        out.push(([r * th.cos(), r * th.sin()], w * r * 2.0 * PI / nt as f64));
                    }
                }
            }
            _ => {
                for k in 0..nt {
                    let th = 2.0 * PI * k as f64 / nt as f64;
                    let (rho, _) = self.rho(th);
                    for (r, w) in gauss_interval(nr, 0.0, rho) {
                        out.push(([r * th.cos(), r * th.sin()], w * r * 2.0 * PI / nt as f64));
                    }
                }
            }
        }
        out
    }

    /// Parameter intervals `(piece, start, end)` covering the boundary.
    fn boundary_pieces(&self) -> Vec<(usize, f64, f64)> {
        match *self {
            TestDomain::Square { side } => (0..4).map(|k| (k, -side / 2.0, side / 2.0)).collect(),
            TestDomain::Annulus { .. } => vec![(0, 0.0, 2.0 * PI), (1, 0.0, 2.0 * PI)],
            _ => vec![(0, 0.0, 2.0 * PI)],
        }
    }

    /// Boundary point and parametric speed.
    fn boundary_point(&self, piece: usize, t: f64) -> (Vec2, f64) {
        match *self {
            TestDomain::Square { side } => {
                let h = side / 2.0;
                let p = match piece {
                    0 => [t, -h],
                    1 => [h, t],
                    2 => [-t, h],
                    _ => [-h, -t],
                };
                (p, 1.0)
            }
            TestDomain::Annulus { inner, outer } => {
                let r = if piece == 0 { inner } else { outer };
                ([r * t.cos(), r * t.sin()], r)
            }
            _ => {
                let (rho, drho) = self.rho(t);
                ([rho * t.cos(), rho * t.sin()], rho.hypot(drho))
            }
        }
    }

    /// Boundary rule (arc-length weights) at resolution `level`.
    pub fn boundary_rule(&self, level: usize) -> Rule {
        let nt = 32 * level;
        let mut out = Vec::new();
        match *self {
            TestDomain::Square { side } => {
                let h = side / 2.0;
                for (s, w) in panel_rule(12 * level, level, -h, h) {
                    out.push(([s, -h], w));
                    out.push(([h, s], w));
                    out.push(([-s, h], w));
                    out.push(([-h, -s], w));
                }
            }
            TestDomain::Annulus { inner, outer } => {
                for k in 0..nt {
                    let th = 2.0 * PI * k as f64 / nt as f64;
                    for r in [inner, outer] {
                        out.push(([r * th.cos(), r * th.sin()], r * 2.0 * PI / nt as f64));
                    }
                }
            }
            _ => {
                for k in 0..nt {
                    let th = 2.0 * PI * k as f64 / nt as f64;
                    let (rho, drho) = self.rho(th);
                    out.push(([rho * th.cos(), rho * th.sin()], rho.hypot(drho) * 2.0 * PI / nt as f64));
                }
            }
        }
        out
    }
}

/// Gauss rule of `order` points on each of `panels` equal panels.
fn panel_rule(order: usize, panels: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    (0..panels).flat_map(|p| gauss_interval(order / panels.max(1) + 4, a + p as f64 * h, a + (p + 1) as f64 * h)).collect()
}

/// Scalar test functions with closed-form gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestFunction {
    Constant {
        value: f64,
    },
    /// `sum c x^a y^b` over `(a, b, c)`.
    Polynomial {
        terms: Vec<(u32, u32, f64)>,
    },
    /// `sin(kx x) cos(ky y)`.
    TrigProduct {
        kx: f64,
        ky: f64,
    },
    /// `sum c e^{i (a x + b y)}` over `(a, b, re c, im c)`.
    TrigSum {
        terms: Vec<(f64, f64, f64, f64)>,
    },
    /// `J_m(k r) e^{i m theta}`.
    FourierBessel {
        m: u32,
        k: f64,
    },
    /// `e^{i k (cos(angle) x + sin(angle) y)}`.
    PlaneWave {
        k: f64,
        angle: f64,
    },
}

impl TestFunction {
    /// Random trigonometric polynomial of degree at most 3 in each variable.
    pub fn random_trig(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = (0..6)
            .map(|_| (rng.gen_range(-3i32..=3) as f64, rng.gen_range(-3i32..=3) as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        TestFunction::TrigSum { terms }
    }

    pub fn value(&self, x: Vec2) -> Complex64 {
        self.value_and_grad(x).0
    }

    pub fn value_and_grad(&self, x: Vec2) -> (Complex64, [Complex64; 2]) {
        let z = Complex64::new(0.0, 0.0);
        match self {
            TestFunction::Constant { value } => (Complex64::from(*value), [z, z]),
            TestFunction::Polynomial { terms } => {
                let mut v = 0.0;
                let mut g = [0.0; 2];
                for &(a, b, c) in terms {
                    let (xa, yb) = (x[0].powi(a as i32), x[1].powi(b as i32));
                    v += c * xa * yb;
                    if a > 0 {
                        g[0] += c * a as f64 * x[0].powi(a as i32 - 1) * yb;
                    }
                    if b > 0 {
                        g[1] += c * b as f64 * xa * x[1].powi(b as i32 - 1);
                    }
                }
                (v.into(), [g[0].into(), g[1].into()])
            }
            TestFunction::TrigProduct { kx, ky } => {
                let (sx, cx) = (kx * x[0]).sin_cos();
                let (sy, cy) = (ky * x[1]).sin_cos();
                ((sx * cy).into(), [(kx * cx * cy).into(), (-ky * sx * sy).into()])
            }
            TestFunction::TrigSum { terms } => {
                let mut v = z;
                let mut g = [z; 2];
                for &(a, b, re, im) in terms {
                    let e = Complex64::new(re, im) * Complex64::from_polar(1.0, a * x[0] + b * x[1]);
                    v += e;
                    g[0] += Complex64::i() * a * e;
                    g[1] += Complex64::i() * b * e;
                }
                (v, g)
            }
            TestFunction::FourierBessel { m, k } => {
                let r = norm(x);
                let th = x[1].atan2(x[0]);
                let m = *m;
                if r == 0.0 || *k == 0.0 {
                    let v = if m == 0 { Complex64::from(1.0) } else { z };
                    // Only m = 1 has a nonzero gradient at the origin.
                    let g = if m == 1 { [Complex64::from(0.5 * k), Complex64::i() * 0.5 * k] } else { [z, z] };
                    return (v, g);
                }
                let js = bessel_j_upto(m + 1, k * r).expect("order within range");
                let jm = js[m as usize];
                let jm1 = if m == 0 { -js[1] } else { js[m as usize - 1] };
                let djm = 0.5 * (jm1 - js[m as usize + 1]);
                let e = Complex64::from_polar(1.0, m as f64 * th);
                let v = jm * e;
                let dr = k * djm * e;
                let dt = Complex64::i() * m as f64 / r * jm * e;
                let (c, s) = (th.cos(), th.sin());
                (v, [dr * c - dt * s, dr * s + dt * c])
            }
            TestFunction::PlaneWave { k, angle } => {
                let d = [angle.cos(), angle.sin()];
                let e = Complex64::from_polar(1.0, k * (d[0] * x[0] + d[1] * x[1]));
                (e, [Complex64::i() * k * d[0] * e, Complex64::i() * k * d[1] * e])
            }
        }
    }
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl CheckResult {
    fn inequality(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, holds: lhs <= rhs * (1.0 + SLACK) }
    }
}

fn check_dimension(n: u32) -> Result<()> {
    if n != 2 {
        return Err(invalid("N", format!("test domains are planar; N must be 2, got {n}")));
    }
    Ok(())
}

/// `[||u||_2, ||grad u||_2, ||u||_{L^2(boundary)}, ||grad u||_1, ||u||_{L^1(boundary)}]`.
///
/// `|u|` and `|grad u|` have kinks where a real `u` or its gradient vanishes,
/// so every term is integrated adaptively: nested in the interior, by arc
/// parameter on the boundary.
fn norms(domain: &TestDomain, u: &TestFunction) -> Result<Vec<f64>> {
    domain.validate()?;
    let point = |x: Vec2, w: f64| {
        let (v, g) = u.value_and_grad(x);
        let gn2 = g[0].norm_sqr() + g[1].norm_sqr();
        [w * v.norm_sqr(), w * gn2, w * gn2.sqrt()]
    };
    let interior = match *domain {
        TestDomain::Square { side } => {
            let h = side / 2.0;
            adaptive_gauss(&|x| adaptive_gauss(&|y| Ok(point([x, y], 1.0)), -h, h), -h, h)?
        }
        TestDomain::Annulus { inner, outer } => {
            adaptive_gauss(&|th| adaptive_gauss(&|r| Ok(point([r * th.cos(), r * th.sin()], r)), inner, outer), 0.0, 2.0 * PI)?
        }
        _ => adaptive_gauss(
            &|th| {
                let (rho, _) = domain.rho(th);
                adaptive_gauss(&|r| Ok(point([r * th.cos(), r * th.sin()], r)), 0.0, rho)
            },
            0.0,
            2.0 * PI,
        )?,
    };
    let mut b = [0.0; 2];
    for piece in domain.boundary_pieces() {
        let v = adaptive_gauss(
            &|t| {
                let (x, speed) = domain.boundary_point(piece.0, t);
                let a = u.value(x).norm();
                Ok([speed * a * a, speed * a])
            },
            piece.1,
            piece.2,
        )?;
        b[0] += v[0];
        b[1] += v[1];
    }
    Ok(vec![interior[0].sqrt(), interior[1].sqrt(), b[0].sqrt(), interior[2], b[1]])
}

const ADAPTIVE_ORDER: usize = 10;
const ADAPTIVE_PANELS: usize = 8;
const ADAPTIVE_DEPTH: usize = 40;
const ADAPTIVE_MAX_PANELS: usize = 4096;

/// Integral of `N` functions over `[a, b]` by Gauss panels, bisecting each
/// panel until its halves agree with it to `QUAD_TOL` relative to a coarse
/// estimate of the whole integral.
fn adaptive_gauss<const N: usize, F>(f: &F, a: f64, b: f64) -> Result<[f64; N]>
where
    F: Fn(f64) -> Result<[f64; N]>,
{
    let rule = gauss_interval(ADAPTIVE_ORDER, 0.0, 1.0);
    let panel = |lo: f64, hi: f64| -> Result<[f64; N]> {
        let mut s = [0.0; N];
        for &(x, w) in &rule {
            let v = f(lo + (hi - lo) * x)?;
            for i in 0..N {
                s[i] += w * (hi - lo) * v[i];
            }
        }
        Ok(s)
    };
    if b <= a {
        return Ok([0.0; N]);
    }
    let h = (b - a) / ADAPTIVE_PANELS as f64;
    let mut stack = Vec::with_capacity(2 * ADAPTIVE_PANELS);
    let mut scale = [0.0f64; N];
    for k in 0..ADAPTIVE_PANELS {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        let p = panel(lo, hi)?;
        for i in 0..N {
            scale[i] += p[i].abs();
        }
        stack.push((lo, hi, p, 0));
    }
    let mut total = [0.0; N];
    let mut splits = 0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (l, r) = (panel(lo, mid)?, panel(mid, hi)?);
        let frac = (hi - lo) / (b - a);
        let gap = |i: usize| (l[i] + r[i] - whole[i]).abs();
        if (0..N).all(|i| gap(i) <= frac * (QUAD_TOL * scale[i] + 1e-15)) {
            for i in 0..N {
                total[i] += l[i] + r[i];
            }
        } else if depth >= ADAPTIVE_DEPTH || splits >= ADAPTIVE_MAX_PANELS {
            let change = (0..N).map(|i| gap(i) / scale[i].max(1e-300)).fold(0.0, f64::max);
            return Err(Error::QuadratureNotConverged { change });
        } else {
            splits += 1;
            stack.push((lo, mid, l, depth + 1));
            stack.push((mid, hi, r, depth + 1));
        }
    }
    Ok(total)
}

/// `||u||_{L^2} <= 4 C(N) |Omega|^{1/2N} (|Omega|^{1/2N} ||grad u||_{L^2} + ||u||_{L^2(boundary)})`.
pub fn friedrichs_check(domain: &TestDomain, u: &TestFunction, n: u32) -> Result<CheckResult> {
    check_dimension(n)?;
    friedrichs_from(domain, &norms(domain, u)?, n)
}

fn friedrichs_from(domain: &TestDomain, v: &[f64], n: u32) -> Result<CheckResult> {
    let c = isoperimetric_constant(n)?;
    let a = domain.area().powf(1.0 / (2.0 * n as f64));
    Ok(CheckResult::inequality(v[0], 4.0 * c * a * (a * v[1] + v[2])))
}

/// `||u||_{L^{N/(N-1)}} <= C(N) (||grad u||_{L^1} + ||u||_{L^1(boundary)})`.
pub fn mazya_check(domain: &TestDomain, u: &TestFunction, n: u32) -> Result<CheckResult> {
    check_dimension(n)?;
    mazya_from(&norms(domain, u)?, n)
}

fn mazya_from(v: &[f64], n: u32) -> Result<CheckResult> {
    let c = isoperimetric_constant(n)?;
    Ok(CheckResult::inequality(v[0], c * (v[3] + v[4])))
}

/// `exp(-1 / (1 - |x - c|^2 / rho^2))` inside the ball, with derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
}

impl Bump {
    /// Value, gradient and Hessian.
    fn eval(&self, x: Vec2) -> (f64, [f64; 2], [[f64; 2]; 2]) {
        let d = sub(x, self.center);
        let r2 = self.radius * self.radius;
        let q = 1.0 - (d[0] * d[0] + d[1] * d[1]) / r2;
        if q <= 0.0 {
            return (0.0, [0.0; 2], [[0.0; 2]; 2]);
        }
        let psi = (-1.0 / q).exp();
        let g = [-2.0 * d[0] / (r2 * q * q), -2.0 * d[1] / (r2 * q * q)];
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let dg = if i == j { -2.0 / (r2 * q * q) } else { 0.0 } - 8.0 * d[i] * d[j] / (r2 * r2 * q * q * q);
                h[i][j] = psi * (g[i] * g[j] + dg);
            }
        }
        (psi, [psi * g[0], psi * g[1]], h)
    }
}

/// Compactly supported vector fields for the Korn check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorTestField {
    /// `grad psi`.
    GradientBump { bump: Bump },
    /// `psi (-x_2, x_1)`.
    RotatedBump { bump: Bump },
    /// `psi (a_i0 + a_i1 x + a_i2 y)_i`.
    LinearBump { bump: Bump, coeffs: [[f64; 3]; 2] },
}

impl VectorTestField {
    pub fn random(bump: Bump, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = [[0.0; 3]; 2];
        for row in coeffs.iter_mut() {
            for c in row.iter_mut() {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
        VectorTestField::LinearBump { bump, coeffs }
    }

    pub fn bump(&self) -> Bump {
        match *self {
            VectorTestField::GradientBump { bump } | VectorTestField::RotatedBump { bump } | VectorTestField::LinearBump { bump, .. } => {
                bump
            }
        }
    }

    /// `grad[i][j] = d u_i / d x_j`.
    pub fn jacobian(&self, x: Vec2) -> [[f64; 2]; 2] {
        let (psi, g, h) = self.bump().eval(x);
        match *self {
            VectorTestField::GradientBump { .. } => h,
            VectorTestField::RotatedBump { .. } => {
                let v = [-x[1], x[0]];
                let dv = [[0.0, -1.0], [1.0, 0.0]];
                let mut j = [[0.0; 2]; 2];
                for a in 0..2 {
                    for b in 0..2 {
                        j[a][b] = g[b] * v[a] + psi * dv[a][b];
                    }
                }
                j
            }
            VectorTestField::LinearBump { coeffs, .. } => {
                let mut j = [[0.0; 2]; 2];
                for a in 0..2 {
                    let v = coeffs[a][0] + coeffs[a][1] * x[0] + coeffs[a][2] * x[1];
                    for b in 0..2 {
                        j[a][b] = g[b] * v + psi * coeffs[a][b + 1];
                    }
                }
                j
            }
        }
    }
}

/// Outcome of the Korn check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KornResult {
    pub grad_sq: f64,
    pub sym_sq: f64,
    pub holds: bool,
}

impl KornResult {
    /// `grad_sq / sym_sq`, or NaN for the zero field.
    pub fn ratio(&self) -> f64 {
        self.grad_sq / self.sym_sq
    }
}

/// `||grad u||^2 <= 2 ||E u||^2` for a field supported in a ball inside the
/// domain, integrated over that ball.
pub fn korn_check(u: &VectorTestField, domain: &TestDomain) -> Result<KornResult> {
    domain.validate()?;
    let b = u.bump();
    if !(b.radius > 0.0) || !domain.contains_ball(b.center, b.radius) {
        return Err(invalid("support", format!("support ball {b:?} is not strictly inside {domain:?}")));
    }
    let point = |r: f64, th: f64| {
        let j = u.jacobian([b.center[0] + r * th.cos(), b.center[1] + r * th.sin()]);
        let (mut gs, mut ss) = (0.0, 0.0);
        for a in 0..2 {
            for c in 0..2 {
                let e = 0.5 * (j[a][c] + j[c][a]);
                gs += r * j[a][c] * j[a][c];
                ss += r * e * e;
            }
        }
        [gs, ss]
    };
    let v = adaptive_gauss(&|th| adaptive_gauss(&|r| Ok(point(r, th)), 0.0, b.radius), 0.0, 2.0 * PI)?;
    Ok(KornResult { grad_sq: v[0], sym_sq: v[1], holds: v[0] <= 2.0 * v[1] * (1.0 + SLACK) })
}

/// Radii and sampled sup-norms of the three-spheres probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeSpheresProbe {
    pub center: Vec2,
    pub s1: f64,
    pub s: f64,
    pub s2: f64,
    pub sup1: f64,
    pub sup: f64,
    pub sup2: f64,
    /// `None` when the inner and outer sup-norms coincide.
    pub beta: Option<f64>,
    /// Polar grid size per ball (radial x angular).
    pub samples: (usize, usize),
}

/// Default polar sampling grid per ball.
pub const DEFAULT_BALL_SAMPLES: (usize, usize) = (128, 128);
/// Relative gap below which two sup-norms count as equal.
pub const DEGENERATE_TOL: f64 = 1e-10;

/// Max of `|u|` over a polar grid on `B(c, s)`, radii `s i / (nr - 1)`.
pub fn ball_sup<F>(u: &F, c: Vec2, s: f64, samples: (usize, usize)) -> f64
where
    F: Fn(Vec2) -> Complex64 + Sync + ?Sized,
{
    let (nr, nt) = samples;
    let nr = nr.max(2);
    par::max_range(nr * nt, |k| {
        let (i, j) = (k / nt, k % nt);
        let r = s * i as f64 / (nr - 1) as f64;
        let th = 2.0 * PI * j as f64 / nt as f64;
        u([c[0] + r * th.cos(), c[1] + r * th.sin()]).norm()
    })
}

/// Sup-norms on `B(c, s1) ⊂ B(c, s) ⊂ B(c, s2)` and the exponent `beta` in
/// `||u||_s = ||u||_{s2}^{1-beta} ||u||_{s1}^beta`. Each ball's sup includes
/// the samples of the balls it contains, so the norms are nondecreasing and
/// `beta` lies in `[0, 1]`.
pub fn three_spheres_exponent<F>(u: &F, k: f64, center: Vec2, radii: (f64, f64, f64), samples: (usize, usize)) -> Result<ThreeSpheresProbe>
where
    F: Fn(Vec2) -> Complex64 + Sync + ?Sized,
{
    let (s1, s, s2) = radii;
    if !(0.0 < s1 && s1 < s && s < s2 && s2.is_finite()) {
        return Err(invalid("radii", format!("need 0 < s1 < s < s2, got {radii:?}")));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(invalid("k", format!("wave number must be nonnegative, got {k}")));
    }
    let sup1 = ball_sup(u, center, s1, samples);
    let sup = ball_sup(u, center, s, samples).max(sup1);
    let sup2 = ball_sup(u, center, s2, samples).max(sup);
    let beta = if sup2 - sup1 <= DEGENERATE_TOL * sup2 || sup1 == 0.0 {
        None
    } else {
        Some(((sup2.ln() - sup.ln()) / (sup2.ln() - sup1.ln())).clamp(0.0, 1.0))
    };
    Ok(ThreeSpheresProbe { center, s1, s, s2, sup1, sup, sup2, beta, samples })
}

/// Chain of balls of radius `s` with centers `s/2` apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallChain {
    pub centers: Vec<Vec2>,
    pub radius: f64,
}

impl BallChain {
    /// Straight chain from `start` to `end`: `ceil(2 l / s) + 1` balls.
    pub fn straight(start: Vec2, end: Vec2, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("s", format!("radius must be positive, got {s}")));
        }
        let len = norm(sub(end, start));
        let m = (2.0 * len / s).ceil() as usize + 1;
        let centers = (0..m)
            .map(|i| {
                let t = if m == 1 { 0.0 } else { i as f64 / (m - 1) as f64 };
                [start[0] + t * (end[0] - start[0]), start[1] + t * (end[1] - start[1])]
            })
            .collect();
        Ok(Self { centers, radius: s })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Sup-norms along a chain and per-step exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub sups: Vec<f64>,
    /// `E = max(1, largest sup)`.
    pub bound: f64,
    /// `ln(M_{j+1}/E) / ln(M_j/E)`; `None` where undefined.
    pub exponents: Vec<Option<f64>>,
    pub balls: usize,
    pub samples: (usize, usize),
}

/// Samples `|u|` on each ball of the chain. Every ball must stay at distance
/// at least `s` from each obstacle, i.e. its center at least `2s` away.
pub fn propagate_smallness<F>(u: &F, chain: &BallChain, obstacles: &[BoundaryCurve], samples: (usize, usize)) -> Result<ChainReport>
where
    F: Fn(Vec2) -> Complex64 + Sync + ?Sized,
{
    let s = chain.radius;
    for &c in &chain.centers {
        for k in obstacles {
            if k.contains(c) || k.distance_to(c) < 2.0 * s {
                return Err(Error::RegionIntersects);
            }
        }
    }
    let sups: Vec<f64> = chain.centers.iter().map(|&c| ball_sup(u, c, s, samples)).collect();
    let bound = sups.iter().copied().fold(1.0, f64::max);
    let exponents = sups
        .windows(2)
        .map(|w| {
            let (a, b) = ((w[0] / bound).ln(), (w[1] / bound).ln());
            if w[0] > 0.0 && w[1] > 0.0 && a < 0.0 {
                Some(b / a)
            } else {
                None
            }
        })
        .collect();
    Ok(ChainReport { sups, bound, exponents, balls: chain.len(), samples })
}

/// One row of the verification table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub check_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The built-in domains.
pub fn builtin_domains() -> Vec<TestDomain> {
    vec![
        TestDomain::Disc { radius: 1.0 },
        TestDomain::Square { side: 2.0 },
        TestDomain::Annulus { inner: 0.5, outer: 1.5 },
        TestDomain::PerturbedDisc { radius: 1.0, delta: 0.15, m: 5 },
    ]
}

/// The built-in scalar families, with names; `kp` sets the Bessel mode.
pub fn builtin_functions(kp: f64, random_draws: u64) -> Vec<(String, TestFunction)> {
    let mut out = vec![
        ("zero".to_string(), TestFunction::Constant { value: 0.0 }),
        ("constant".to_string(), TestFunction::Constant { value: 1.0 }),
        ("polynomial".to_string(), TestFunction::Polynomial { terms: vec![(2, 0, 1.0), (1, 1, -1.0), (0, 3, 0.3), (0, 0, 0.5)] }),
        ("trig_product".to_string(), TestFunction::TrigProduct { kx: 2.0, ky: 3.0 }),
        ("bessel_j0".to_string(), TestFunction::FourierBessel { m: 0, k: kp }),
        ("bessel_j3".to_string(), TestFunction::FourierBessel { m: 3, k: 2.0 * kp }),
    ];
    for seed in 0..random_draws {
        out.push((format!("random_trig_{seed}"), TestFunction::random_trig(seed)));
    }
    out
}

/// Support of the Korn fields on a built-in domain: `B((0.2, -0.1), 0.3)`,
/// moved to `B((1, -0.1), 0.3)` in the annulus.
pub fn suite_bump(domain: &TestDomain) -> Bump {
    match domain {
        TestDomain::Annulus { .. } => Bump { center: [1.0, -0.1], radius: 0.3 },
        _ => Bump { center: [0.2, -0.1], radius: 0.3 },
    }
}

/// Fields for the Korn check: a gradient, a rotated bump, and `draws`
/// seeded linear bumps, all supported in `bump`.
pub fn builtin_vector_fields(bump: Bump, draws: u64) -> Vec<(String, VectorTestField)> {
    let mut out = vec![
        ("gradient_bump".to_string(), VectorTestField::GradientBump { bump }),
        ("rotated_bump".to_string(), VectorTestField::RotatedBump { bump }),
    ];
    for seed in 0..draws {
        out.push((format!("linear_bump_{seed}"), VectorTestField::random(bump, seed)));
    }
    out
}

/// Runs Friedrichs and Maz'ya on every domain and family, Maz'ya equality
/// on discs with constants, and Korn on every vector field and domain.
pub fn verify_suite(kp: f64, random_draws: u64, korn_draws: u64) -> Result<Vec<SuiteRow>> {
    let domains = builtin_domains();
    let funcs = builtin_functions(kp, random_draws);
    let mut jobs: Vec<(String, TestDomain, TestFunction)> = Vec::new();
    for d in &domains {
        for (name, f) in &funcs {
            jobs.push((format!("{}/{name}", d.name()), *d, f.clone()));
        }
    }
    let scalar = par::map_slice(&jobs, |(name, d, f)| -> Result<Vec<SuiteRow>> {
        let v = norms(d, f)?;
        let fr = friedrichs_from(d, &v, 2)?;
        let mz = mazya_from(&v, 2)?;
        Ok(vec![row(format!("friedrichs/{name}"), fr), row(format!("mazya/{name}"), mz)])
    });
    let mut rows = Vec::new();
    for r in scalar {
        rows.extend(r?);
    }
    for radius in [0.5, 1.0, 2.0] {
        let c = mazya_check(&TestDomain::Disc { radius }, &TestFunction::Constant { value: 1.0 }, 2)?;
        rows.push(SuiteRow {
            check_name: format!("mazya_equality/disc_{radius}"),
            lhs: c.lhs,
            rhs: c.rhs,
            holds: (c.lhs - c.rhs).abs() <= SLACK * c.rhs,
        });
    }
    let mut kjobs = Vec::new();
    for d in &domains {
        for (name, f) in &builtin_vector_fields(suite_bump(d), korn_draws) {
            kjobs.push((format!("korn/{}/{name}", d.name()), *d, *f));
        }
    }
    for r in par::map_slice(&kjobs, |(name, d, f)| korn_check(f, d).map(|k| (name.clone(), k))) {
        let (name, k) = r?;
        rows.push(SuiteRow { check_name: name, lhs: k.grad_sq, rhs: 2.0 * k.sym_sq, holds: k.holds });
    }
    Ok(rows)
}

fn row(name: String, c: CheckResult) -> SuiteRow {
    SuiteRow { check_name: name, lhs: c.lhs, rhs: c.rhs, holds: c.holds }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DISC: TestDomain = TestDomain::Disc { radius: 1.0 };

    #[test]
    fn constant_on_unit_disc() {
        let c = friedrichs_check(&DISC, &TestFunction::Constant { value: 1.0 }, 2).unwrap();
        assert!((c.lhs - PI.sqrt()).abs() < 1e-12);
        let expected = 4.0 / (2.0 * PI.sqrt()) * PI.powf(0.25) * (2.0 * PI).sqrt();
        assert!((c.rhs - expected).abs() < 1e-12 && (c.rhs - 3.7655).abs() < 1e-4);
        assert!(c.holds);
        let z = friedrichs_check(&DISC, &TestFunction::Constant { value: 0.0 }, 2).unwrap();
        assert_eq!((z.lhs, z.rhs, z.holds), (0.0, 0.0, true));
    }

    #[test]
    fn mazya_is_an_equality_for_constants_on_discs() {
        for a in [0.3, 1.0, 2.5] {
            let c = mazya_check(&TestDomain::Disc { radius: a }, &TestFunction::Constant { value: 1.0 }, 2).unwrap();
            assert!((c.lhs - PI.sqrt() * a).abs() < 1e-12 * a);
            assert!((c.rhs - PI.sqrt() * a).abs() < 1e-12 * a);
            assert!(c.holds);
        }
        assert!(mazya_check(&DISC, &TestFunction::Constant { value: 1.0 }, 3).is_err());
    }

    #[test]
    fn areas_and_boundaries_match_quadrature() {
        for d in builtin_domains() {
            let a: f64 = d.interior_rule(4).iter().map(|p| p.1).sum();
            let b: f64 = d.boundary_rule(4).iter().map(|p| p.1).sum();
            assert!((a - d.area()).abs() < 1e-10 * d.area(), "{d:?}");
            assert!((b - d.boundary_measure()).abs() < 1e-10 * b, "{d:?}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for (_, f) in builtin_functions(1.0, 3).into_iter().chain([("pw".into(), TestFunction::PlaneWave { k: 2.0, angle: 0.3 })]) {
            let x = [0.31, -0.57];
            let (_, g) = f.value_and_grad(x);
            for i in 0..2 {
                let mut a = x;
                let mut b = x;
                a[i] += h;
                b[i] -= h;
                let fd = (f.value(a) - f.value(b)) / (2.0 * h);
                assert!((fd - g[i]).norm() < 1e-7, "{f:?}");
            }
        }
        for (_, u) in builtin_vector_fields(suite_bump(&DISC), 2) {
            let x = [0.25, -0.05];
            let j = u.jacobian(x);
            let val = |p: Vec2| -> [f64; 2] {
                let (psi, g, _) = u.bump().eval(p);
                match u {
                    VectorTestField::GradientBump { .. } => g,
                    VectorTestField::RotatedBump { .. } => [-psi * p[1], psi * p[0]],
                    VectorTestField::LinearBump { coeffs, .. } => {
                        [0, 1].map(|a| psi * (coeffs[a][0] + coeffs[a][1] * p[0] + coeffs[a][2] * p[1]))
                    }
                }
            };
            for b in 0..2 {
                let mut p = x;
                let mut q = x;
                p[b] += h;
                q[b] -= h;
                let (vp, vq) = (val(p), val(q));
                for a in 0..2 {
                    assert!(((vp[a] - vq[a]) / (2.0 * h) - j[a][b]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn bessel_mode_on_disc_matches_refined_quadrature() {
        let f = TestFunction::FourierBessel { m: 0, k: 1.0 };
        let c = friedrichs_check(&DISC, &f, 2).unwrap();
        // Refined oracle: 400-point Gauss in r, angular integral exact.
        let (mut u2, mut g2) = (0.0, 0.0);
        for (r, w) in gauss_interval(400, 0.0, 1.0) {
            let j = bessel_j_upto(1, r).unwrap();
            u2 += 2.0 * PI * r * w * j[0] * j[0];
            g2 += 2.0 * PI * r * w * j[1] * j[1];
        }
        let j1 = bessel_j_upto(0, 1.0).unwrap()[0];
        let bnd = (2.0 * PI).sqrt() * j1.abs();
        let a = PI.powf(0.25);
        let rhs = 4.0 / (2.0 * PI.sqrt()) * a * (a * g2.sqrt() + bnd);
        assert!((c.lhs - u2.sqrt()).abs() < 1e-6);
        assert!((c.rhs - rhs).abs() < 1e-6);
        assert!(c.holds);
    }

    #[test]
    fn korn_cases() {
        let bump = Bump { center: [0.2, -0.1], radius: 0.3 };
        let g = korn_check(&VectorTestField::GradientBump { bump }, &DISC).unwrap();
        assert!((g.grad_sq - g.sym_sq).abs() < 1e-10 * g.grad_sq && g.holds);
        let r = korn_check(&VectorTestField::RotatedBump { bump }, &DISC).unwrap();
        assert!(r.holds && r.ratio() < 2.0, "{}", r.ratio());
        // Centred at the origin the rotation field is divergence free and
        // the ratio is exactly 2.
        let centred = Bump { center: [0.0, 0.0], radius: 0.3 };
        let e = korn_check(&VectorTestField::RotatedBump { bump: centred }, &DISC).unwrap();
        assert!((e.ratio() - 2.0).abs() < 1e-8 && e.holds);
        let off = Bump { center: [0.9, 0.0], radius: 0.3 };
        assert!(korn_check(&VectorTestField::GradientBump { bump: off }, &DISC).is_err());
        let zero = korn_check(&VectorTestField::LinearBump { bump, coeffs: [[0.0; 3]; 2] }, &DISC).unwrap();
        assert_eq!((zero.grad_sq, zero.sym_sq, zero.holds), (0.0, 0.0, true));
    }

    #[test]
    fn three_spheres_on_bessel_and_plane_waves() {
        let f = TestFunction::FourierBessel { m: 5, k: 1.0 };
        let u = |x: Vec2| f.value(x);
        let p = three_spheres_exponent(&u, 1.0, [0.0, 0.0], (0.1, 0.2, 0.4), DEFAULT_BALL_SAMPLES).unwrap();
        let beta = p.beta.unwrap();
        let j = |r: f64| bessel_j_upto(5, r).unwrap()[5];
        let oracle = (j(0.4).ln() - j(0.2).ln()) / (j(0.4).ln() - j(0.1).ln());
        assert!(beta > 0.0 && beta < 1.0);
        assert!((beta - oracle).abs() < 1e-3, "{beta} vs {oracle}");
        assert!(p.sup1 <= p.sup && p.sup <= p.sup2);
        let w = TestFunction::PlaneWave { k: 1.0, angle: 0.2 };
        let pw = |x: Vec2| w.value(x);
        assert!(three_spheres_exponent(&pw, 1.0, [0.0, 0.0], (0.1, 0.2, 0.4), (32, 32)).unwrap().beta.is_none());
        assert!(three_spheres_exponent(&u, 1.0, [0.0, 0.0], (0.2, 0.1, 0.4), (8, 8)).is_err());
    }

    #[test]
    fn chain_count_and_zero_field() {
        let c = BallChain::straight([3.0, 0.0], [5.0, 0.0], 0.25).unwrap();
        assert_eq!(c.len(), 17);
        let zero = |_: Vec2| Complex64::new(0.0, 0.0);
        let disc = BoundaryCurve::disc(1.0).unwrap();
        let r = propagate_smallness(&zero, &c, &[disc], (16, 16)).unwrap();
        assert!(r.sups.iter().all(|&s| s == 0.0));
        let bad = BallChain::straight([1.2, 0.0], [3.0, 0.0], 0.25).unwrap();
        assert!(matches!(propagate_smallness(&zero, &bad, &[disc], (4, 4)), Err(Error::RegionIntersects)));
    }

    #[test]
    fn non_convergent_quadrature_is_refused() {
        let f = TestFunction::TrigProduct { kx: 1e5, ky: 1.0 };
        assert!(matches!(friedrichs_check(&DISC, &f, 2), Err(Error::QuadratureNotConverged { .. })));
    }
}
