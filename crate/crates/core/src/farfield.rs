//! Far-field patterns, Helmholtz decomposition by finite differences,
//! radiation and decay diagnostics, and far/near error norms.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bie::ScatteringSolution;
use crate::error::{invalid, Error, Result};
use crate::geom2::{dot, norm, Vec2};
use crate::kernels::Part;
use crate::medium::{ElasticMedium, IncidentPlaneWave};
use crate::par;

/// Smallest admissible number of far-field directions.
pub const MIN_DIRECTIONS: usize = 64;

/// Column names of the far-field CSV.
pub const FARFIELD_HEADER: [&str; 5] = ["theta", "re_up", "im_up", "re_us", "im_us"];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// `e^{i pi/4} / sqrt(8 pi k)`: the far-field factor of `(i/4) H_0(k r)`.
fn gamma(k: f64) -> Complex64 {
    Complex64::from_polar(1.0, PI / 4.0) / (8.0 * PI * k).sqrt()
}

/// Far-field amplitudes on `M` equispaced directions `theta_m = 2 pi m / M`.
///
/// `up[m]` is the amplitude along `x_hat`, `us[m]` the amplitude along the
/// tangent `Q x_hat = (-x_hat_2, x_hat_1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub up: Vec<Complex64>,
    pub us: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn new(up: Vec<Complex64>, us: Vec<Complex64>) -> Result<Self> {
        if up.len() != us.len() {
            return Err(Error::MismatchedGrids(up.len(), us.len()));
        }
        if up.len() < MIN_DIRECTIONS {
            return Err(Error::Undersampled { got: up.len(), min: MIN_DIRECTIONS });
        }
        if up.iter().chain(&us).any(|v| !v.is_finite()) {
            return Err(invalid("pattern", "non-finite amplitude"));
        }
        Ok(Self { up, us })
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::new(vec![ZERO; m], vec![ZERO; m])
    }

    pub fn len(&self) -> usize {
        self.up.len()
    }

    pub fn is_empty(&self) -> bool {
        self.up.is_empty()
    }

    pub fn theta(&self, m: usize) -> f64 {
        direction_angle(m, self.len())
    }

    pub fn direction(&self, m: usize) -> Vec2 {
        let t = self.theta(m);
        [t.cos(), t.sin()]
    }

    /// Vector amplitudes `(U_p, U_s)` in direction `m`.
    pub fn vectors(&self, m: usize) -> ([Complex64; 2], [Complex64; 2]) {
        let x = self.direction(m);
        let t = [-x[1], x[0]];
        ([self.up[m] * x[0], self.up[m] * x[1]], [self.us[m] * t[0], self.us[m] * t[1]])
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { up: self.up.iter().map(|v| v * c).collect(), us: self.us.iter().map(|v| v * c).collect() }
    }

    /// Trapezoidal `L^2(S^1)` norm of the stacked pair `(U_p, U_s)`.
    pub fn norm(&self) -> f64 {
        let h = 2.0 * PI / self.len() as f64;
        (h * self.up.iter().chain(&self.us).map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

pub fn direction_angle(m: usize, total: usize) -> f64 {
    2.0 * PI * m as f64 / total as f64
}

/// Far-field pattern of a solution from the leading asymptotics of the
/// layer kernels, integrated against the density by the trapezoidal rule.
pub fn far_field(sol: &ScatteringSolution, m: usize) -> Result<FarFieldPattern> {
    if m < MIN_DIRECTIONS {
        return Err(Error::Undersampled { got: m, min: MIN_DIRECTIONS });
    }
    let medium = &sol.medium;
    let (lam, mu) = (medium.lambda(), medium.mu());
    let w = medium.wavenumbers();
    let (kp, ks) = (w.omega_p, w.omega_s);
    let s = &sol.grid.samples;
    let ie = I * sol.eta;
    let gp = gamma(kp) / (lam + 2.0 * mu);
    let gs = gamma(ks) / mu;
    let values = par::map_range(m, |k| {
        let th = direction_angle(k, m);
        let x = [th.cos(), th.sin()];
        let t = [-x[1], x[0]];
        let (mut sp, mut ss, mut dp, mut ds) = (ZERO, ZERO, ZERO, ZERO);
        for j in 0..s.len() {
            let y = s.points[j];
            let nu = s.normals[j];
            let f = sol.density[j];
            let wj = s.weights[j];
            let xf = x[0] * f[0] + x[1] * f[1];
            let tf = t[0] * f[0] + t[1] * f[1];
            let nf = nu[0] * f[0] + nu[1] * f[1];
            let xn = dot(x, nu);
            let tn = dot(t, nu);
            let ep = Complex64::from_polar(wj, -kp * dot(x, y));
            let es = Complex64::from_polar(wj, -ks * dot(x, y));
            sp += ep * xf;
            ss += es * tf;
            dp += ep * (lam * nf + 2.0 * mu * xn * xf);
            ds += es * (mu * (xn * tf + tn * xf));
        }
        let up = gp * (-I * kp * dp - ie * sp);
        let us = gs * (-I * ks * ds - ie * ss);
        (up, us)
    });
    let (up, us) = values.into_iter().unzip();
    FarFieldPattern::new(up, us)
}

/// `||U - U'||` in `L^2(S^1)`.
pub fn farfield_error(a: &FarFieldPattern, b: &FarFieldPattern) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MismatchedGrids(a.len(), b.len()));
    }
    let h = 2.0 * PI / a.len() as f64;
    let s: f64 = a.up.iter().zip(&b.up).chain(a.us.iter().zip(&b.us)).map(|(p, q)| (p - q).norm_sqr()).sum();
    Ok((h * s).sqrt())
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the pattern as CSV, preceded by `comment` lines (each prefixed
/// with `# `).
pub fn write_farfield_csv<W: Write>(pattern: &FarFieldPattern, comments: &[String], out: W) -> Result<()> {
    let mut out = out;
    for c in comments {
        writeln!(out, "# {c}").map_err(csv_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FARFIELD_HEADER).map_err(csv_err)?;
    for m in 0..pattern.len() {
        let (p, s) = (pattern.up[m], pattern.us[m]);
        w.write_record([pattern.theta(m), p.re, p.im, s.re, s.im].map(fmt_f64)).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Reads a pattern written by [`write_farfield_csv`]; `#` lines are skipped.
pub fn read_farfield_csv<R: Read>(input: R) -> Result<FarFieldPattern> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(FARFIELD_HEADER) {
        return Err(Error::Csv(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let v: Vec<f64> =
            rec.iter().map(|f| f.trim().parse::<f64>().map_err(|e| Error::Csv(format!("{f}: {e}")))).collect::<Result<_>>()?;
        if v.len() != 5 {
            return Err(Error::Csv(format!("expected 5 fields, got {}", v.len())));
        }
        rows.push(v);
    }
    let m = rows.len();
    for (k, row) in rows.iter().enumerate() {
        if (row[0] - direction_angle(k, m)).abs() > 1e-15 * (1.0 + row[0].abs()) {
            return Err(Error::Csv(format!("row {k}: theta {} is not on the {m}-point grid", row[0])));
        }
    }
    FarFieldPattern::new(
        rows.iter().map(|r| Complex64::new(r[1], r[2])).collect(),
        rows.iter().map(|r| Complex64::new(r[3], r[4])).collect(),
    )
}

pub(crate) fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

/// Longitudinal and transversal parts of a field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposedField {
    pub u_p: [Complex64; 2],
    pub u_s: [Complex64; 2],
    pub h: f64,
}

/// Default finite-difference step: `1e-4` shear wavelengths.
pub fn default_fd_step(medium: &ElasticMedium) -> f64 {
    1e-4 * medium.shear_wavelength()
}

/// `u_p = -grad div u / omega_p^2` and `u_s = (grad div u - Lap u) / omega_s^2`
/// by central differences with step `h`. `clearance` is the distance from
/// `x` to the nearest point where the field is not smooth; it must exceed
/// `4h`.
pub fn helmholtz_decompose<F>(field: &F, medium: &ElasticMedium, x: Vec2, h: f64, clearance: f64) -> Result<DecomposedField>
where
    F: Fn(Vec2) -> [Complex64; 2] + ?Sized,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("step must be positive, got {h}")));
    }
    if !(clearance > 4.0 * h) {
        return Err(invalid("h", format!("step {h:.3e} too large for clearance {clearance:.3e} (need clearance > 4h)")));
    }
    let w = medium.wavenumbers();
    let at = |i: f64, j: f64| field([x[0] + i * h, x[1] + j * h]);
    let c = at(0.0, 0.0);
    let (xp, xm, yp, ym) = (at(1.0, 0.0), at(-1.0, 0.0), at(0.0, 1.0), at(0.0, -1.0));
    let (pp, pm, mp, mm) = (at(1.0, 1.0), at(1.0, -1.0), at(-1.0, 1.0), at(-1.0, -1.0));
    let h2 = h * h;
    let mut dxx = [ZERO; 2];
    let mut dyy = [ZERO; 2];
    let mut dxy = [ZERO; 2];
    for a in 0..2 {
        dxx[a] = (xp[a] - 2.0 * c[a] + xm[a]) / h2;
        dyy[a] = (yp[a] - 2.0 * c[a] + ym[a]) / h2;
        dxy[a] = (pp[a] - pm[a] - mp[a] + mm[a]) / (4.0 * h2);
    }
    let graddiv = [dxx[0] + dxy[1], dxy[0] + dyy[1]];
    let lap = [dxx[0] + dyy[0], dxx[1] + dyy[1]];
    let kp2 = w.omega_p * w.omega_p;
    let ks2 = w.omega_s * w.omega_s;
    Ok(DecomposedField { u_p: [-graddiv[0] / kp2, -graddiv[1] / kp2], u_s: [(graddiv[0] - lap[0]) / ks2, (graddiv[1] - lap[1]) / ks2], h })
}

/// `|div u_s|` and `|curl u_p|` at `x`, each part computed with step `h`
/// and differentiated again with the same step.
pub fn nested_divergence_and_curl<F>(field: &F, medium: &ElasticMedium, x: Vec2, h: f64, clearance: f64) -> Result<(f64, f64)>
where
    F: Fn(Vec2) -> [Complex64; 2] + ?Sized,
{
    if !(clearance > 8.0 * h) {
        return Err(invalid("h", format!("step {h:.3e} too large for clearance {clearance:.3e} (need clearance > 8h)")));
    }
    let part = |dx: f64, dy: f64| helmholtz_decompose(field, medium, [x[0] + dx, x[1] + dy], h, clearance - h);
    let (xp, xm) = (part(h, 0.0)?, part(-h, 0.0)?);
    let (yp, ym) = (part(0.0, h)?, part(0.0, -h)?);
    let div = (xp.u_s[0] - xm.u_s[0] + yp.u_s[1] - ym.u_s[1]) / (2.0 * h);
    let curl = (xp.u_p[1] - xm.u_p[1] - yp.u_p[0] + ym.u_p[0]) / (2.0 * h);
    Ok((div.norm(), curl.norm()))
}

/// Nested finite-difference residuals at steps `h0, h0/2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct RichardsonReport {
    pub steps: Vec<f64>,
    pub div_us: Vec<f64>,
    pub curl_up: Vec<f64>,
}

impl RichardsonReport {
    /// Ratios between successive values; `4` for a pure `O(h^2)` error.
    pub fn ratios(values: &[f64]) -> Vec<f64> {
        values.windows(2).map(|w| w[0] / w[1]).collect()
    }

    /// Whether every halving reduces both residuals by a factor in `[3, 5]`.
    pub fn second_order(&self) -> bool {
        let ok = |v: &[f64]| Self::ratios(v).iter().all(|r| (3.0..=5.0).contains(r));
        ok(&self.div_us) && ok(&self.curl_up)
    }
}

pub fn richardson_check<F>(field: &F, medium: &ElasticMedium, x: Vec2, h0: f64, levels: usize, clearance: f64) -> Result<RichardsonReport>
where
    F: Fn(Vec2) -> [Complex64; 2] + ?Sized,
{
    let mut rep = RichardsonReport { steps: Vec::new(), div_us: Vec::new(), curl_up: Vec::new() };
    let mut h = h0;
    for _ in 0..levels {
        let (d, c) = nested_divergence_and_curl(field, medium, x, h, clearance)?;
        rep.steps.push(h);
        rep.div_us.push(d);
        rep.curl_up.push(c);
        h *= 0.5;
    }
    Ok(rep)
}

/// Largest `r^{1/2} |(d/dr - i omega_a) u_a(r x_hat)|` over `m` directions
/// for both parts, with the radial derivative by central differences.
pub fn radiation_residual_of<P, S>(part_p: &P, part_s: &S, medium: &ElasticMedium, r: f64, m: usize) -> (f64, f64)
where
    P: Fn(Vec2) -> [Complex64; 2] + Sync + ?Sized,
    S: Fn(Vec2) -> [Complex64; 2] + Sync + ?Sized,
{
    let w = medium.wavenumbers();
    let one = |f: &(dyn Fn(Vec2) -> [Complex64; 2] + Sync), k: f64| {
        let dr = 1e-3 * 2.0 * PI / k;
        par::max_range(m, |j| {
            let th = direction_angle(j, m);
            let x = [th.cos(), th.sin()];
            let at = |rr: f64| f([rr * x[0], rr * x[1]]);
            let (a, b, c) = (at(r + dr), at(r - dr), at(r));
            let mut s = 0.0;
            for i in 0..2 {
                let d = (a[i] - b[i]) / (2.0 * dr) - I * k * c[i];
                s += d.norm_sqr();
            }
            r.sqrt() * s.sqrt()
        })
    };
    let fp = |x: Vec2| part_p(x);
    let fs = |x: Vec2| part_s(x);
    (one(&fp, w.omega_p), one(&fs, w.omega_s))
}

/// [`radiation_residual_of`] for the scattered field of a solution.
pub fn radiation_residual(sol: &ScatteringSolution, r: f64, m: usize) -> Result<(f64, f64)> {
    let reach = sol.curve().max_radius();
    if !(r > reach + 1.0) {
        return Err(invalid("r", format!("radius {r} must exceed R + 1 = {}", reach + 1.0)));
    }
    let p = |x: Vec2| sol.scattered_part_unchecked(x, Part::P);
    let s = |x: Vec2| sol.scattered_part_unchecked(x, Part::S);
    Ok(radiation_residual_of(&p, &s, &sol.medium, r, m))
}

/// Radiation residual of a plane wave split into its parts; it does not
/// decay, since plane waves are not outgoing.
pub fn plane_wave_radiation_residual(wave: &IncidentPlaneWave, medium: &ElasticMedium, r: f64, m: usize) -> (f64, f64) {
    let p = |x: Vec2| wave.evaluate_parts(medium, x).0;
    let s = |x: Vec2| wave.evaluate_parts(medium, x).1;
    radiation_residual_of(&p, &s, medium, r, m)
}

/// Sup of `|u_scat(r x_hat)| r^{1/2}` over a radius grid and directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBound {
    pub sup: f64,
    pub radius_at_sup: f64,
    pub radii: usize,
    pub directions: usize,
}

pub fn decay_bound(sol: &ScatteringSolution, r_min: f64, r_max: f64, radii: usize, m: usize) -> Result<DecayBound> {
    if !(r_min > 0.0 && r_max >= r_min) || radii == 0 || m == 0 {
        return Err(invalid("decay", "need 0 < r_min <= r_max and nonempty grids"));
    }
    let rs: Vec<f64> =
        (0..radii).map(|i| if radii == 1 { r_min } else { r_min + (r_max - r_min) * i as f64 / (radii - 1) as f64 }).collect();
    for &r in &rs {
        for j in [0, m / 4, m / 2, 3 * m / 4] {
            let th = direction_angle(j, m);
            check_exterior(sol, [r * th.cos(), r * th.sin()])?;
        }
    }
    let vals = par::map_range(radii, |i| {
        let r = rs[i];
        (0..m)
            .map(|j| {
                let th = direction_angle(j, m);
                let u = sol.scattered_part_unchecked([r * th.cos(), r * th.sin()], Part::Both);
                (u[0].norm_sqr() + u[1].norm_sqr()).sqrt() * r.sqrt()
            })
            .fold(0.0, f64::max)
    });
    let (i, sup) = vals.iter().enumerate().fold((0, -1.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    Ok(DecayBound { sup, radius_at_sup: rs[i], radii, directions: m })
}

fn check_exterior(sol: &ScatteringSolution, x: Vec2) -> Result<()> {
    crate::kernels::check_target(sol.curve(), &sol.grid.samples, x)
}

/// Region on which near fields are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeRegion {
    Ball {
        center: Vec2,
        radius: f64,
    },
    /// Annulus about the origin.
    Annulus {
        inner: f64,
        outer: f64,
    },
}

impl ProbeRegion {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProbeRegion::Ball { center, radius } => radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite()),
            ProbeRegion::Annulus { inner, outer } => inner >= 0.0 && outer > inner && outer.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("region", format!("degenerate probe region {self:?}")))
        }
    }

    /// Whether the closed region stays at least `margin` away from the
    /// obstacle bounded by `sol`'s curve.
    fn clear_of(&self, sol: &ScatteringSolution, margin: f64) -> bool {
        let curve = sol.curve();
        match *self {
            ProbeRegion::Ball { center, radius } => !curve.contains(center) && curve.distance_to(center) > radius + margin,
            ProbeRegion::Annulus { inner, outer } => {
                let pts = curve.polyline(1024);
                let rmax = pts.iter().map(|p| norm(*p)).fold(0.0, f64::max);
                let rmin = pts.iter().map(|p| norm(*p)).fold(f64::INFINITY, f64::min);
                let encloses_origin = curve.contains([0.0, 0.0]);
                // The annulus avoids the obstacle if the obstacle lies inside
                // the hole or outside the outer circle.
                (rmax + margin < inner && (encloses_origin || inner > 0.0)) || (!encloses_origin && rmin > outer + margin)
            }
        }
    }

    /// `count` points uniformly distributed in the region.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let (u, v): (f64, f64) = (rng.gen(), rng.gen());
                let th = 2.0 * PI * v;
                match *self {
                    ProbeRegion::Ball { center, radius } => {
                        let r = radius * u.sqrt();
                        [center[0] + r * th.cos(), center[1] + r * th.sin()]
                    }
                    ProbeRegion::Annulus { inner, outer } => {
                        let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
                        [r * th.cos(), r * th.sin()]
                    }
                }
            })
            .collect()
    }
}

fn field_gap(a: &ScatteringSolution, b: &ScatteringSolution, points: &[Vec2]) -> f64 {
    par::max_range(points.len(), |i| {
        let x = points[i];
        let u = a.scattered_part_unchecked(x, Part::Both);
        let v = b.scattered_part_unchecked(x, Part::Both);
        ((u[0] - v[0]).norm_sqr() + (u[1] - v[1]).norm_sqr()).sqrt()
    })
}

fn check_pair(a: &ScatteringSolution, b: &ScatteringSolution, region: &ProbeRegion) -> Result<()> {
    region.validate()?;
    if a.medium != b.medium || a.incident != b.incident {
        return Err(invalid("near_field", "solutions differ in medium or incident wave"));
    }
    for s in [a, b] {
        if !region.clear_of(s, s.grid.samples.spacing) {
            return Err(Error::RegionIntersects);
        }
    }
    Ok(())
}

/// Sampled sup of `|u - u'|` (scattered fields; the incident parts cancel)
/// over `probes` random points of `region`.
pub fn near_field_error(a: &ScatteringSolution, b: &ScatteringSolution, region: &ProbeRegion, probes: usize, seed: u64) -> Result<f64> {
    check_pair(a, b, region)?;
    Ok(field_gap(a, b, &region.sample(probes, seed)))
}

/// Near-field errors on the ball `B(x0, s)` and on the annulus
/// `|x0| - s < |x| < |x0| + s` that contains it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearFieldErrors {
    pub eps: f64,
    pub eps1: f64,
    pub probes: usize,
}

/// The annulus sup is taken over its own probes together with the ball
/// probes, so `eps <= eps1` holds exactly.
pub fn near_field_errors(
    a: &ScatteringSolution,
    b: &ScatteringSolution,
    x0: Vec2,
    s: f64,
    probes: usize,
    seed: u64,
) -> Result<NearFieldErrors> {
    let ball = ProbeRegion::Ball { center: x0, radius: s };
    let ring = ProbeRegion::Annulus { inner: norm(x0) - s, outer: norm(x0) + s };
    check_pair(a, b, &ball)?;
    check_pair(a, b, &ring)?;
    let eps = field_gap(a, b, &ball.sample(probes, seed));
    let ring_eps = field_gap(a, b, &ring.sample(probes, seed.wrapping_add(1)));
    Ok(NearFieldErrors { eps, eps1: eps.max(ring_eps), probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bie::solve_dirichlet;
    use crate::geometry::BoundaryCurve;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
    }

    fn kite_solution(wave: IncidentPlaneWave) -> ScatteringSolution {
        solve_dirichlet(&medium(), &BoundaryCurve::kite(), &wave, 96).unwrap()
    }

    #[test]
    fn pattern_matches_large_radius_evaluation() {
        let m = medium();
        let w = m.wavenumbers();
        for wave in [IncidentPlaneWave::longitudinal(0.3), IncidentPlaneWave::transversal(2.0)] {
            let sol = kite_solution(wave);
            let ff = far_field(&sol, 64).unwrap();
            let r = 4000.0;
            let mut err = 0.0f64;
            let mut scale = 0.0f64;
            for k in 0..ff.len() {
                let x = ff.direction(k);
                let t = [-x[1], x[0]];
                let pt = [r * x[0], r * x[1]];
                let up = sol.scattered_part_unchecked(pt, Part::P);
                let us = sol.scattered_part_unchecked(pt, Part::S);
                let ap = (up[0] * x[0] + up[1] * x[1]) * r.sqrt() * Complex64::from_polar(1.0, -w.omega_p * r);
                let as_ = (us[0] * t[0] + us[1] * t[1]) * r.sqrt() * Complex64::from_polar(1.0, -w.omega_s * r);
                err = err.max((ap - ff.up[k]).norm()).max((as_ - ff.us[k]).norm());
                scale = scale.max(ff.up[k].norm()).max(ff.us[k].norm());
            }
            assert!(scale > 1e-2);
            assert!(err < 1e-3 * scale, "{err} vs {scale}");
        }
    }

    #[test]
    fn structure_and_zero_pattern() {
        let sol = kite_solution(IncidentPlaneWave::longitudinal(0.0));
        let ff = far_field(&sol, 64).unwrap();
        for k in 0..64 {
            let x = ff.direction(k);
            let (p, s) = ff.vectors(k);
            assert!((s[0] * x[0] + s[1] * x[1]).norm() <= 1e-15 * ff.us[k].norm());
            assert!((p[0] * x[1] - p[1] * x[0]).norm() <= 1e-15 * ff.up[k].norm());
        }
        let zero = kite_solution(IncidentPlaneWave::longitudinal(0.0).scaled(ZERO));
        let fz = far_field(&zero, 64).unwrap();
        assert!(fz.up.iter().chain(&fz.us).all(|v| *v == ZERO));
        assert!(far_field(&sol, 32).is_err());
    }

    #[test]
    fn error_norm_properties() {
        let sol = kite_solution(IncidentPlaneWave::longitudinal(0.0));
        let a = far_field(&sol, 64).unwrap();
        assert_eq!(farfield_error(&a, &a).unwrap(), 0.0);
        let twice = a.scaled(Complex64::new(2.0, 0.0));
        assert!((farfield_error(&a, &twice).unwrap() - a.norm()).abs() < 1e-14 * a.norm());
        let b = far_field(&sol, 72).unwrap();
        assert!(matches!(farfield_error(&a, &b), Err(Error::MismatchedGrids(64, 72))));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let sol = kite_solution(IncidentPlaneWave::transversal(1.0));
        let a = far_field(&sol, 64).unwrap();
        let mut buf = Vec::new();
        write_farfield_csv(&a, &["config: {}".to_string()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# config: {}\ntheta,re_up,im_up,re_us,im_us\n"));
        let b = read_farfield_csv(buf.as_slice()).unwrap();
        assert_eq!(a, b);
        assert!(read_farfield_csv("x,y\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn plane_waves_decompose_into_one_part() {
        let m = medium();
        let h = default_fd_step(&m);
        for wave in [IncidentPlaneWave::longitudinal(0.7), IncidentPlaneWave::transversal(-1.2)] {
            let f = |x: Vec2| wave.evaluate(&m, x);
            let x = [0.4, -1.3];
            let d = helmholtz_decompose(&f, &m, x, h, f64::INFINITY).unwrap();
            let u = f(x);
            let (other, same) = match wave.kind() {
                crate::medium::WaveKind::Longitudinal => (d.u_s, d.u_p),
                crate::medium::WaveKind::Transversal => (d.u_p, d.u_s),
            };
            assert!(other[0].norm() + other[1].norm() < 1e-6);
            assert!((same[0] - u[0]).norm() + (same[1] - u[1]).norm() < 1e-6);
        }
        let f = |x: Vec2| IncidentPlaneWave::longitudinal(0.0).evaluate(&m, x);
        assert!(helmholtz_decompose(&f, &m, [0.0, 0.0], 0.1, 0.3).is_err());
    }

    #[test]
    fn scattered_parts_are_solenoidal_and_irrotational() {
        let m = medium();
        let sol = kite_solution(IncidentPlaneWave::longitudinal(0.4));
        let f = |x: Vec2| sol.scattered_part_unchecked(x, Part::Both);
        let x = [3.0, 1.0];
        let clearance = sol.curve().distance_to(x);
        let rep = richardson_check(&f, &m, x, 1e-2 * m.shear_wavelength(), 3, clearance).unwrap();
        assert!(rep.second_order(), "{rep:?}");
    }

    #[test]
    fn radiation_residual_decays_for_scattered_fields_only() {
        let m = medium();
        let sol = kite_solution(IncidentPlaneWave::longitudinal(0.0));
        let r: Vec<(f64, f64)> = [25.0, 50.0, 100.0].iter().map(|&r| radiation_residual(&sol, r, 64).unwrap()).collect();
        assert!(r[0].0 > r[1].0 && r[1].0 > r[2].0);
        assert!(r[0].1 > r[1].1 && r[1].1 > r[2].1);
        let wave = IncidentPlaneWave::longitudinal(0.0);
        let a = plane_wave_radiation_residual(&wave, &m, 25.0, 64);
        let b = plane_wave_radiation_residual(&wave, &m, 100.0, 64);
        assert!(b.0 > a.0);
        assert!(radiation_residual(&sol, 1.5, 64).is_err());
    }

    #[test]
    fn near_field_errors_are_ordered() {
        let m = medium();
        let wave = IncidentPlaneWave::longitudinal(0.0);
        let a = solve_dirichlet(&m, &BoundaryCurve::disc(1.0).unwrap(), &wave, 64).unwrap();
        let b = solve_dirichlet(&m, &BoundaryCurve::radial(1.0, 0.05, 3).unwrap(), &wave, 64).unwrap();
        let e = near_field_errors(&a, &b, [3.0, 0.0], 0.5, 200, 7).unwrap();
        assert!(e.eps > 0.0 && e.eps <= e.eps1);
        let same = near_field_errors(&a, &a, [3.0, 0.0], 0.5, 50, 7).unwrap();
        assert_eq!(same.eps1, 0.0);
        let bad = ProbeRegion::Ball { center: [1.2, 0.0], radius: 0.5 };
        assert!(matches!(near_field_error(&a, &b, &bad, 10, 1), Err(Error::RegionIntersects)));
    }
}
