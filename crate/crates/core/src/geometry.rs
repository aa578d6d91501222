//! Scatterer boundaries, the perturbation families used by the experiments,
//! Hausdorff-type distances between scatterers and symmetric-difference areas.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom2::{norm, point_segment_distance, sub, Vec2};
use crate::medium::{closeness_constant, ElasticMedium};
use crate::par;
use crate::quadrature::gauss_interval;

const KITE_BEND: f64 = 0.65;
const KITE_HEIGHT: f64 = 1.5;

fn origin() -> Vec2 {
    [0.0, 0.0]
}

fn one() -> f64 {
    1.0
}

/// Parametric curve families, all traversed counterclockwise for `t` in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveFamily {
    Disc {
        radius: f64,
        #[serde(default = "origin")]
        center: Vec2,
    },
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        rotation: f64,
        #[serde(default = "origin")]
        center: Vec2,
    },
    /// `scale (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)`.
    Kite {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "origin")]
        center: Vec2,
    },
    /// `r(theta) = radius (1 + delta cos(m theta))` about `center`.
    RadialPerturbation {
        radius: f64,
        delta: f64,
        m: u32,
        #[serde(default = "origin")]
        center: Vec2,
    },
}

/// A validated smooth simple closed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFamily", into = "CurveFamily")]
pub struct BoundaryCurve {
    family: CurveFamily,
}

impl TryFrom<CurveFamily> for BoundaryCurve {
    type Error = Error;
    fn try_from(f: CurveFamily) -> Result<Self> {
        make_curve(f)
    }
}

impl From<BoundaryCurve> for CurveFamily {
    fn from(c: BoundaryCurve) -> Self {
        c.family
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn finite_point(name: &'static str, p: Vec2) -> Result<()> {
    if p[0].is_finite() && p[1].is_finite() {
        Ok(())
    } else {
        Err(invalid(name, "must be finite"))
    }
}

/// Builds a curve, rejecting parameters that give a degenerate or
/// self-intersecting boundary.
pub fn make_curve(family: CurveFamily) -> Result<BoundaryCurve> {
    match family {
        CurveFamily::Disc { radius, center } => {
            positive("radius", radius)?;
            finite_point("center", center)?;
        }
        CurveFamily::Ellipse { a, b, rotation, center } => {
            positive("a", a)?;
            positive("b", b)?;
            finite_point("center", center)?;
            if !rotation.is_finite() {
                return Err(invalid("rotation", "must be finite"));
            }
        }
        CurveFamily::Kite { scale, center } => {
            positive("scale", scale)?;
            finite_point("center", center)?;
        }
        CurveFamily::RadialPerturbation { radius, delta, m, center } => {
            positive("radius", radius)?;
            finite_point("center", center)?;
            let bound = 1.0 / (1.0 + (m as f64).powi(2));
            if !(delta.abs() < bound) {
                return Err(Error::InvalidGeometry(format!(
                    "radial perturbation needs |delta| < 1/(1+m^2) = {bound}, got delta = {delta}"
                )));
            }
        }
    }
    Ok(BoundaryCurve { family })
}

impl BoundaryCurve {
    pub fn disc(radius: f64) -> Result<Self> {
        make_curve(CurveFamily::Disc { radius, center: origin() })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        make_curve(CurveFamily::Ellipse { a, b, rotation: 0.0, center: origin() })
    }

    pub fn kite() -> Self {
        BoundaryCurve { family: CurveFamily::Kite { scale: 1.0, center: origin() } }
    }

    pub fn radial(radius: f64, delta: f64, m: u32) -> Result<Self> {
        make_curve(CurveFamily::RadialPerturbation { radius, delta, m, center: origin() })
    }

    pub fn family(&self) -> CurveFamily {
        self.family
    }

    pub fn center(&self) -> Vec2 {
        match self.family {
            CurveFamily::Disc { center, .. }
            | CurveFamily::Ellipse { center, .. }
            | CurveFamily::Kite { center, .. }
            | CurveFamily::RadialPerturbation { center, .. } => center,
        }
    }

    /// The same shape moved by `v`.
    pub fn translated(&self, v: Vec2) -> Self {
        let c = self.center();
        let nc = [c[0] + v[0], c[1] + v[1]];
        let family = match self.family {
            CurveFamily::Disc { radius, .. } => CurveFamily::Disc { radius, center: nc },
            CurveFamily::Ellipse { a, b, rotation, .. } => CurveFamily::Ellipse { a, b, rotation, center: nc },
            CurveFamily::Kite { scale, .. } => CurveFamily::Kite { scale, center: nc },
            CurveFamily::RadialPerturbation { radius, delta, m, .. } => CurveFamily::RadialPerturbation { radius, delta, m, center: nc },
        };
        BoundaryCurve { family }
    }

    /// Position and first two derivatives at parameter `t`.
    pub fn eval(&self, t: f64) -> [Vec2; 3] {
        let (s, c) = t.sin_cos();
        let (p, d1, d2) = match self.family {
            CurveFamily::Disc { radius: r, .. } => ([r * c, r * s], [-r * s, r * c], [-r * c, -r * s]),
            CurveFamily::Ellipse { a, b, rotation, .. } => {
                let (rs, rc) = rotation.sin_cos();
                let rot = |v: Vec2| [rc * v[0] - rs * v[1], rs * v[0] + rc * v[1]];
                (rot([a * c, b * s]), rot([-a * s, b * c]), rot([-a * c, -b * s]))
            }
            CurveFamily::Kite { scale: k, .. } => {
                let (s2, c2) = (2.0 * t).sin_cos();
                (
                    [k * (c + KITE_BEND * c2 - KITE_BEND), k * KITE_HEIGHT * s],
                    [k * (-s - 2.0 * KITE_BEND * s2), k * KITE_HEIGHT * c],
                    [k * (-c - 4.0 * KITE_BEND * c2), -k * KITE_HEIGHT * s],
                )
            }
            CurveFamily::RadialPerturbation { radius, delta, m, .. } => {
                let mf = m as f64;
                let (sm, cm) = (mf * t).sin_cos();
                let r = radius * (1.0 + delta * cm);
                let r1 = -radius * delta * mf * sm;
                let r2 = -radius * delta * mf * mf * cm;
                ([r * c, r * s], [r1 * c - r * s, r1 * s + r * c], [(r2 - r) * c - 2.0 * r1 * s, (r2 - r) * s + 2.0 * r1 * c])
            }
        };
        let o = self.center();
        [[p[0] + o[0], p[1] + o[1]], d1, d2]
    }

    pub fn point(&self, t: f64) -> Vec2 {
        self.eval(t)[0]
    }

    pub fn speed(&self, t: f64) -> f64 {
        norm(self.eval(t)[1])
    }

    /// Outward unit normal `(y', -x') / |gamma'|`.
    pub fn normal(&self, t: f64) -> Vec2 {
        let d = self.eval(t)[1];
        let s = norm(d);
        [d[1] / s, -d[0] / s]
    }

    /// Signed curvature, positive for a counterclockwise convex arc.
    pub fn curvature(&self, t: f64) -> f64 {
        let [_, d1, d2] = self.eval(t);
        (d1[0] * d2[1] - d1[1] * d2[0]) / norm(d1).powi(3)
    }

    /// Arc length by the trapezoidal rule with `n` nodes (spectrally accurate).
    pub fn perimeter(&self, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|j| self.speed(j as f64 * h)).sum::<f64>() * h
    }

    /// Enclosed area.
    pub fn area(&self) -> f64 {
        match self.family {
            CurveFamily::Disc { radius, .. } => PI * radius * radius,
            CurveFamily::Ellipse { a, b, .. } => PI * a * b,
            _ => {
                let n = 1024;
                let h = 2.0 * PI / n as f64;
                let o = self.center();
                (0..n)
                    .map(|j| {
                        let [p, d, _] = self.eval(j as f64 * h);
                        0.5 * ((p[0] - o[0]) * d[1] - (p[1] - o[1]) * d[0])
                    })
                    .sum::<f64>()
                    * h
            }
        }
    }

    /// `n` equispaced-parameter samples.
    pub fn polyline(&self, n: usize) -> Vec<Vec2> {
        (0..n).map(|j| self.point(2.0 * PI * j as f64 / n as f64)).collect()
    }

    /// Largest distance of the curve from the origin, sampled densely.
    pub fn max_radius(&self) -> f64 {
        self.polyline(4096).into_iter().map(norm).fold(0.0, f64::max) * (1.0 + 1e-6)
    }

    /// Smallest distance of the curve from `x`, estimated from dense samples
    /// and refined by Newton steps on the squared distance.
    pub fn distance_to(&self, x: Vec2) -> f64 {
        let n = 512;
        let (mut best, mut tb) = (f64::INFINITY, 0.0);
        for j in 0..n {
            let t = 2.0 * PI * j as f64 / n as f64;
            let d = norm(sub(self.point(t), x));
            if d < best {
                best = d;
                tb = t;
            }
        }
        let mut t = tb;
        for _ in 0..30 {
            let [p, d1, d2] = self.eval(t);
            let r = sub(p, x);
            let g = r[0] * d1[0] + r[1] * d1[1];
            let hss = d1[0] * d1[0] + d1[1] * d1[1] + r[0] * d2[0] + r[1] * d2[1];
            if hss <= 0.0 {
                break;
            }
            let step = (g / hss).clamp(-0.05, 0.05);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        best.min(norm(sub(self.point(t), x)))
    }

    /// Whether `x` lies in the closed region bounded by the curve.
    pub fn contains(&self, x: Vec2) -> bool {
        let o = self.center();
        let v = sub(x, o);
        match self.family {
            CurveFamily::Disc { radius, .. } => norm(v) <= radius,
            CurveFamily::Ellipse { a, b, rotation, .. } => {
                let (rs, rc) = rotation.sin_cos();
                let u = [rc * v[0] + rs * v[1], -rs * v[0] + rc * v[1]];
                (u[0] / a).powi(2) + (u[1] / b).powi(2) <= 1.0
            }
            CurveFamily::RadialPerturbation { radius, delta, m, .. } => {
                let th = v[1].atan2(v[0]);
                norm(v) <= radius * (1.0 + delta * (m as f64 * th).cos())
            }
            CurveFamily::Kite { scale, .. } => match self.kite_row(v[1] / scale) {
                Some((lo, hi)) => {
                    let xs = v[0] / scale;
                    lo <= xs && xs <= hi
                }
                None => false,
            },
        }
    }

    /// Horizontal extent of the unit kite at height `y`.
    fn kite_row(&self, y: f64) -> Option<(f64, f64)> {
        let s = y / KITE_HEIGHT;
        if s.abs() > 1.0 {
            return None;
        }
        let t1 = s.asin();
        let t2 = PI - t1;
        let x = |t: f64| t.cos() + KITE_BEND * (2.0 * t).cos() - KITE_BEND;
        let (a, b) = (x(t1), x(t2));
        Some((a.min(b), a.max(b)))
    }

    /// Distance from `p` (interior to the region) to the boundary along the
    /// ray of angle `theta`, when the region is known to be star-shaped
    /// about `p`.
    fn ray_radius(&self, p: Vec2, theta: f64) -> Option<f64> {
        let dir = [theta.cos(), theta.sin()];
        let o = self.center();
        let v = sub(p, o);
        match self.family {
            CurveFamily::Disc { radius, .. } => {
                let b = v[0] * dir[0] + v[1] * dir[1];
                let c = v[0] * v[0] + v[1] * v[1] - radius * radius;
                Some(-b + (b * b - c).sqrt())
            }
            CurveFamily::Ellipse { a, b, rotation, .. } => {
                let (rs, rc) = rotation.sin_cos();
                let rot = |w: Vec2| [(rc * w[0] + rs * w[1]) / a, (-rs * w[0] + rc * w[1]) / b];
                let q = rot(v);
                let e = rot(dir);
                let aa = e[0] * e[0] + e[1] * e[1];
                let bb = q[0] * e[0] + q[1] * e[1];
                let cc = q[0] * q[0] + q[1] * q[1] - 1.0;
                Some((-bb + (bb * bb - aa * cc).sqrt()) / aa)
            }
            CurveFamily::RadialPerturbation { radius, delta, m, .. } if norm(v) == 0.0 => {
                Some(radius * (1.0 + delta * (m as f64 * theta).cos()))
            }
            _ => None,
        }
    }

    fn star_point_candidate(&self) -> Option<Vec2> {
        match self.family {
            CurveFamily::RadialPerturbation { .. } => Some(self.center()),
            _ => None,
        }
    }
}

/// A-priori data: `C^{2,alpha}` class constants `r`, `L`, the enclosing
/// radius `R` and the closeness threshold `H0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityParams {
    pub r: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub alpha: f64,
    #[serde(rename = "H0")]
    pub h0: f64,
}

impl RegularityParams {
    /// Checks positivity, `0 < alpha < 1` and `H0 < H1(medium, N)`.
    pub fn validate(&self, medium: &ElasticMedium, n: u32) -> Result<()> {
        positive("r", self.r)?;
        positive("L", self.l)?;
        positive("R", self.big_r)?;
        positive("H0", self.h0)?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        let h1 = closeness_constant(medium, n)?;
        if !(self.h0 < h1) {
            return Err(Error::InvalidAprioriData { h0: self.h0, h1 });
        }
        Ok(())
    }

    /// Whether the curve fits in the ball of radius `R` about the origin.
    pub fn encloses(&self, curve: &BoundaryCurve) -> bool {
        curve.max_radius() <= self.big_r
    }
}

/// `true` iff `area <= H0` and the a-priori data are admissible.
pub fn closeness_check(area_excess: f64, params: &RegularityParams, medium: &ElasticMedium, n: u32) -> Result<bool> {
    if !(area_excess >= 0.0) {
        return Err(invalid("area", format!("must be nonnegative, got {area_excess}")));
    }
    let h1 = closeness_constant(medium, n)?;
    if !(params.h0 > 0.0 && params.h0 < h1) {
        return Err(Error::InvalidAprioriData { h0: params.h0, h1 });
    }
    Ok(area_excess <= params.h0)
}

/// The three distances between two scatterers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceTriple {
    /// Largest distance from a boundary point of one scatterer lying outside
    /// the other to the other's boundary.
    pub d: f64,
    /// Hausdorff distance of the boundaries.
    pub d_hat: f64,
    /// Hausdorff distance of the filled scatterers.
    pub d_tilde: f64,
}

/// Minimum number of boundary samples accepted by [`distances`].
pub const MIN_SAMPLES: usize = 256;

fn polyline_distance(x: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let d = point_segment_distance(x, poly[i], poly[(i + 1) % n]);
        if d < best {
            best = d;
        }
    }
    best
}

/// One-sided quantities for samples of `a` against `b`: the Hausdorff part,
/// the part restricted to samples outside `b`, and the filled-region part
/// including an interior grid of `a`.
fn one_sided(a: &BoundaryCurve, pa: &[Vec2], b: &BoundaryCurve, pb: &[Vec2]) -> (f64, f64, f64) {
    let per_sample: Vec<(f64, bool)> = par::map_slice(pa, |&x| (polyline_distance(x, pb), b.contains(x)));
    let mut hat = 0.0f64;
    let mut outside = 0.0f64;
    for &(dist, inside) in &per_sample {
        hat = hat.max(dist);
        if !inside {
            outside = outside.max(dist);
        }
    }
    let grid = interior_grid(a, 48);
    let interior = par::map_slice(&grid, |&x| if b.contains(x) { 0.0 } else { polyline_distance(x, pb) }).into_iter().fold(0.0, f64::max);
    (hat, outside, outside.max(interior))
}

fn bounding_box(p: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for q in p {
        for k in 0..2 {
            lo[k] = lo[k].min(q[k]);
            hi[k] = hi[k].max(q[k]);
        }
    }
    (lo, hi)
}

fn interior_grid(c: &BoundaryCurve, per_side: usize) -> Vec<Vec2> {
    let (lo, hi) = bounding_box(&c.polyline(512));
    let mut out = Vec::new();
    for i in 0..per_side {
        for j in 0..per_side {
            let x = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.5) / per_side as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.5) / per_side as f64,
            ];
            if c.contains(x) {
                out.push(x);
            }
        }
    }
    out
}

/// `d`, `d_hat` and `d_tilde` from `m` boundary samples per curve.
pub fn distances(k: &BoundaryCurve, k2: &BoundaryCurve, m: usize) -> Result<DistanceTriple> {
    if m < MIN_SAMPLES {
        return Err(Error::Undersampled { got: m, min: MIN_SAMPLES });
    }
    let p1 = k.polyline(m);
    let p2 = k2.polyline(m);
    let (h12, o12, f12) = one_sided(k, &p1, k2, &p2);
    let (h21, o21, f21) = one_sided(k2, &p2, k, &p1);
    Ok(DistanceTriple { d: o12.max(o21), d_hat: h12.max(h21), d_tilde: f12.max(f21) })
}

/// How a symmetric-difference area is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum AreaMethod {
    Quadrature,
    MonteCarlo { seed: u64, samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaEstimate {
    pub value: f64,
    /// Standard error of a Monte Carlo estimate, zero for quadrature.
    pub std_error: f64,
}

/// `|K Δ K'|`.
pub fn area_symmetric_difference(k: &BoundaryCurve, k2: &BoundaryCurve, method: AreaMethod) -> Result<AreaEstimate> {
    match method {
        AreaMethod::Quadrature => Ok(AreaEstimate { value: area_quadrature(k, k2), std_error: 0.0 }),
        AreaMethod::MonteCarlo { seed, samples } => {
            if samples == 0 {
                return Err(invalid("samples", "must be positive"));
            }
            Ok(area_monte_carlo(k, k2, seed, samples))
        }
    }
}

fn area_quadrature(k: &BoundaryCurve, k2: &BoundaryCurve) -> f64 {
    if k == k2 {
        return 0.0;
    }
    // A common star point: the center of a radial family, else the midpoint
    // of the centers (disc and ellipse are convex).
    let candidates = [
        k.star_point_candidate(),
        k2.star_point_candidate(),
        Some({
            let (a, b) = (k.center(), k2.center());
            [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
        }),
    ];
    for p in candidates.into_iter().flatten() {
        if !(k.contains(p) && k2.contains(p)) {
            continue;
        }
        if k.ray_radius(p, 0.0).is_some() && k2.ray_radius(p, 0.0).is_some() {
            return polar_area(k, k2, p);
        }
    }
    scanline_area(k, k2)
}

/// `(1/2) int |r1^2 - r2^2| dtheta`, split at sign changes.
fn polar_area(k: &BoundaryCurve, k2: &BoundaryCurve, p: Vec2) -> f64 {
    let f = |th: f64| {
        let a = k.ray_radius(p, th).unwrap_or(0.0);
        let b = k2.ray_radius(p, th).unwrap_or(0.0);
        a * a - b * b
    };
    let cells = 2048;
    let h = 2.0 * PI / cells as f64;
    let mut breaks = vec![0.0];
    for i in 0..cells {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let (fa, fb) = (f(a), f(b));
        if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            breaks.push(0.5 * (lo + hi));
        }
    }
    breaks.push(2.0 * PI);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let pieces = (((w[1] - w[0]) / h).ceil() as usize).max(1);
        let step = (w[1] - w[0]) / pieces as f64;
        for s in 0..pieces {
            let a = w[0] + s as f64 * step;
            for (x, wt) in gauss_interval(8, a, a + step) {
                total += wt * f(x).abs();
            }
        }
    }
    0.5 * total
}

/// Crossings of the closed polygon with the horizontal line at `y`.
fn crossings(poly: &[Vec2], y: f64) -> Vec<f64> {
    let n = poly.len();
    let mut xs = Vec::new();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a[1] <= y) != (b[1] <= y) {
            xs.push(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs
}

/// Length of the symmetric difference of two unions of intervals given by
/// sorted crossing lists.
fn xor_length(a: &[f64], b: &[f64]) -> f64 {
    let mut events: Vec<(f64, usize)> = a.iter().map(|&x| (x, 0)).chain(b.iter().map(|&x| (x, 1))).collect();
    events.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut inside = [false, false];
    let mut last = 0.0;
    let mut total = 0.0;
    for (x, which) in events {
        if inside[0] != inside[1] {
            total += x - last;
        }
        inside[which] = !inside[which];
        last = x;
    }
    total
}

fn scanline_area(k: &BoundaryCurve, k2: &BoundaryCurve) -> f64 {
    let samples = 8192;
    let p1 = k.polyline(samples);
    let p2 = k2.polyline(samples);
    let (lo1, hi1) = bounding_box(&p1);
    let (lo2, hi2) = bounding_box(&p2);
    let ylo = lo1[1].min(lo2[1]);
    let yhi = hi1[1].max(hi2[1]);
    let lines = 4000;
    let h = (yhi - ylo) / lines as f64;
    let rows = par::map_range(lines, |i| {
        let y = ylo + (i as f64 + 0.5) * h;
        xor_length(&crossings(&p1, y), &crossings(&p2, y))
    });
    rows.iter().sum::<f64>() * h
}

fn area_monte_carlo(k: &BoundaryCurve, k2: &BoundaryCurve, seed: u64, samples: usize) -> AreaEstimate {
    let (lo1, hi1) = bounding_box(&k.polyline(1024));
    let (lo2, hi2) = bounding_box(&k2.polyline(1024));
    // Pad for the chord sag of the sampled bounding box.
    let pad = 1e-3 * (hi1[0] - lo1[0] + hi1[1] - lo1[1] + hi2[0] - lo2[0] + hi2[1] - lo2[1]);
    let lo = [lo1[0].min(lo2[0]) - pad, lo1[1].min(lo2[1]) - pad];
    let hi = [hi1[0].max(hi2[0]) + pad, hi1[1].max(hi2[1]) + pad];
    let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let x = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if k.contains(x) != k2.contains(x) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    AreaEstimate { value: box_area * p, std_error: box_area * (p * (1.0 - p) / samples as f64).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_geometry() {
        let c = BoundaryCurve::disc(1.0).unwrap();
        for j in 0..16 {
            let t = j as f64 * 0.4;
            assert!((c.curvature(t) - 1.0).abs() < 1e-14);
            let n = c.normal(t);
            let p = c.point(t);
            assert!((n[0] - p[0]).abs() < 1e-15 && (n[1] - p[1]).abs() < 1e-15);
        }
        assert!((c.perimeter(64) - 2.0 * PI).abs() < 1e-13);
        let r = BoundaryCurve::radial(1.0, 0.0, 5).unwrap();
        for j in 0..16 {
            let t = j as f64 * 0.4;
            assert_eq!(r.eval(t)[0], c.eval(t)[0]);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let curves = [
            BoundaryCurve::kite(),
            BoundaryCurve::radial(1.2, 0.05, 3).unwrap(),
            make_curve(CurveFamily::Ellipse { a: 1.5, b: 0.7, rotation: 0.3, center: [0.2, -0.1] }).unwrap(),
        ];
        let h = 1e-5;
        for c in &curves {
            for j in 0..12 {
                let t = 0.1 + j as f64 * 0.5;
                let [_, d1, d2] = c.eval(t);
                let (p, m) = (c.eval(t + h), c.eval(t - h));
                for k in 0..2 {
                    assert!(((p[0][k] - m[0][k]) / (2.0 * h) - d1[k]).abs() < 1e-8);
                    assert!(((p[1][k] - m[1][k]) / (2.0 * h) - d2[k]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn kite_arc_length_is_stable() {
        let k = BoundaryCurve::kite();
        let a = k.perimeter(256);
        let b = k.perimeter(512);
        assert!((a - b).abs() < 1e-10);
        // Signed area positive means counterclockwise.
        assert!(k.area() > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BoundaryCurve::disc(0.0).is_err());
        assert!(matches!(BoundaryCurve::radial(1.0, 0.2, 2), Err(Error::InvalidGeometry(_))));
        assert!(BoundaryCurve::radial(1.0, 0.19, 2).is_ok());
        assert!(BoundaryCurve::ellipse(1.0, -1.0).is_err());
    }

    #[test]
    fn containment() {
        let k = BoundaryCurve::kite();
        assert!(k.contains([0.0, 0.0]));
        assert!(!k.contains([0.0, 1.6]));
        assert!(!k.contains([1.1, 0.0]));
        assert!(k.contains([0.99, 0.0]));
        let r = BoundaryCurve::radial(1.0, 0.05, 4).unwrap();
        assert!(r.contains([1.04, 0.0]) && !r.contains([1.06, 0.0]));
    }

    #[test]
    fn distance_examples() {
        let a = BoundaryCurve::disc(1.0).unwrap();
        let b = BoundaryCurve::disc(1.5).unwrap();
        let t = distances(&a, &b, 1024).unwrap();
        assert!((t.d_tilde - 0.5).abs() < 1e-4, "{t:?}");
        assert!((t.d_hat - 0.5).abs() < 1e-4);
        assert!(t.d <= t.d_hat);

        let c = a.translated([0.2, 0.0]);
        let t = distances(&a, &c, 1024).unwrap();
        assert!((t.d_tilde - 0.2).abs() < 1e-4, "{t:?}");

        let z = distances(&a, &a, 256).unwrap();
        assert_eq!((z.d, z.d_hat, z.d_tilde), (0.0, 0.0, 0.0));
        assert!(matches!(distances(&a, &b, 100), Err(Error::Undersampled { .. })));
    }

    #[test]
    fn area_examples() {
        let a = BoundaryCurve::disc(1.0).unwrap();
        let q = AreaMethod::Quadrature;
        assert_eq!(area_symmetric_difference(&a, &a, q).unwrap().value, 0.0);
        let far = a.translated([3.0, 0.0]);
        let v = area_symmetric_difference(&a, &far, q).unwrap().value;
        assert!((v - 2.0 * PI).abs() < 2e-3 * 2.0 * PI, "{v}");
        let lens = 2.0 * (0.25f64).acos() - 0.25 * 3.75f64.sqrt();
        let want = 2.0 * PI - 2.0 * lens;
        let half = a.translated([0.5, 0.0]);
        let v = area_symmetric_difference(&a, &half, q).unwrap().value;
        assert!((v - want).abs() < 1e-3 * want, "{v} vs {want}");
        let mc = area_symmetric_difference(&a, &half, AreaMethod::MonteCarlo { seed: 7, samples: 200_000 }).unwrap();
        assert!((mc.value - want).abs() < 4.0 * mc.std_error + 1e-3 * want);
    }

    #[test]
    fn closeness_examples() {
        let m = ElasticMedium::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let h1 = PI / 8.0;
        let p = RegularityParams { r: 0.1, l: 1.0, big_r: 3.0, alpha: 0.5, h0: 0.2 };
        assert!(closeness_check(0.0, &p, &m, 2).unwrap());
        assert!(closeness_check(0.2, &p, &m, 2).unwrap());
        assert!(!closeness_check(0.21, &p, &m, 2).unwrap());
        let bad = RegularityParams { h0: closeness_constant(&m, 2).unwrap(), ..p };
        assert!((bad.h0 - h1).abs() < 1e-15);
        assert!(matches!(closeness_check(0.0, &bad, &m, 2), Err(Error::InvalidAprioriData { .. })));
    }
}
