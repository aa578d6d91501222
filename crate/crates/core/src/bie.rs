//! Nyström solver for scattering by a rigid obstacle in the plane.
//!
//! The scattered field is sought as `u = D(phi) - i eta S(phi)` with the
//! elastic single and double layers. Letting `x` approach the boundary from
//! outside gives the second-kind equation
//!
//! ```text
//! (1/2) phi + D phi - i eta S phi = -u_inc    on the boundary.
//! ```
//!
//! Kernels are split as
//!
//! ```text
//! S: Phi |gamma'|   = M1 ln(4 sin^2((t-s)/2)) + M2
//! D: T Phi |gamma'| = Q0 (1/2) cot((s-t)/2) + M1 ln(4 sin^2((t-s)/2)) + M2
//! ```
//!
//! with smooth `M1`, `M2`, and each singular factor is integrated exactly
//! against the trigonometric interpolant of the smooth factor.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geom2::Vec2;
use crate::geometry::BoundaryCurve;
use crate::kernels::{check_target, layer_potential_part, CurveSamples, Kernel2d, LayerKind, Part, M2};
use crate::linalg::{Lu, Matrix};
use crate::medium::{ElasticMedium, IncidentPlaneWave};
use crate::par;
use crate::quadrature::{cauchy_weight, log_weight, trig_basis};

/// Smallest admissible node count.
pub const MIN_NODES: usize = 32;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ZERO2: M2 = [[ZERO; 2]; 2];

pub type DensityVector = Vec<[Complex64; 2]>;

/// Equispaced parameter nodes on the boundary with the geometric data the
/// quadrature needs.
#[derive(Debug, Clone)]
pub struct NystromGrid {
    pub curve: BoundaryCurve,
    pub samples: CurveSamples,
    pub tangents: Vec<Vec2>,
    pub second: Vec<Vec2>,
    pub curvature: Vec<f64>,
}

impl NystromGrid {
    pub fn new(curve: &BoundaryCurve, n: usize) -> Result<Self> {
        if n < MIN_NODES || n % 2 == 1 {
            return Err(invalid("n", format!("node count must be even and at least {MIN_NODES}, got {n}")));
        }
        let samples = CurveSamples::new(curve, n);
        let evals: Vec<[Vec2; 3]> = samples.t.iter().map(|&t| curve.eval(t)).collect();
        Ok(Self {
            curve: *curve,
            tangents: evals.iter().map(|e| e[1]).collect(),
            second: evals.iter().map(|e| e[2]).collect(),
            curvature: samples.t.iter().map(|&t| curve.curvature(t)).collect(),
            samples,
        })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }
}

/// Point on the boundary at which the boundary operator is evaluated.
struct Target {
    t: f64,
    x: Vec2,
    /// Node index when the target coincides with a node.
    node: Option<usize>,
}

/// Kernel splitting for one medium.
struct Splitter {
    k: Kernel2d,
    /// `ln r` coefficient of `a` at `r = 0`.
    a_log0: f64,
    /// Constant term of `a` at `r = 0`.
    a_rest0: Complex64,
    /// `b` at `r = 0`.
    b0: f64,
    /// Coefficient of `(1/2) cot((s - t)/2)` in the double layer.
    q0: M2,
}

impl Splitter {
    fn new(medium: &ElasticMedium) -> Self {
        let k = Kernel2d::new(medium);
        let (c, mu) = (k.c, k.mu);
        let pre = I / (4.0 * mu);
        let ln_s = (0.5 * k.ks).ln() + EULER_GAMMA;
        let ln_p = (0.5 * k.kp).ln() + EULER_GAMMA;
        let a_rest0 = pre * ((1.0 + c) / 2.0 + I / PI * (ln_s + 0.5) + c * I / PI * (ln_p - 0.5));
        let g = Complex64::new(-c / (2.0 * PI), 0.0);
        Self { k, a_log0: -(1.0 + c) / (4.0 * PI * mu), a_rest0, b0: (1.0 - c) / (4.0 * PI * mu), q0: [[ZERO, g], [-g, ZERO]] }
    }

    /// Quadrature blocks `(D_j, S_j)` for the target against every node `j`,
    /// given the log and Cauchy weights for the target.
    fn row(&self, grid: &NystromGrid, target: &Target, rw: &dyn Fn(usize) -> f64, cw: &dyn Fn(usize) -> f64) -> Vec<(M2, M2)> {
        let n = grid.n();
        let h = 2.0 * PI / n as f64;
        let s = &grid.samples;
        (0..n)
            .map(|j| {
                let (r, c) = (rw(j), cw(j));
                if target.node == Some(j) {
                    return self.diagonal(grid, j, r, h);
                }
                let y = s.points[j];
                let d = [target.x[0] - y[0], target.x[1] - y[1]];
                let dist = d[0].hypot(d[1]);
                let e = [d[0] / dist, d[1] / dist];
                let (full, log) = self.k.coefs_full_and_log(dist);
                let sp = s.speeds[j];
                let u = target.t - s.t[j];
                let lnsin = (4.0 * (0.5 * u).sin().powi(2)).ln();
                let cot = 0.5 / (-0.5 * u).tan();

                let phi = self.k.phi_from(&full, e);
                let phi_j = self.k.phi_from(&log, e);
                let tr = self.k.traction_from(&full, dist, e, s.normals[j]);
                let tr_j = self.k.traction_from(&log, dist, e, s.normals[j]);
                let mut db = ZERO2;
                let mut sb = ZERO2;
                for a in 0..2 {
                    for b in 0..2 {
                        let m1s = 0.5 * sp * phi_j[a][b];
                        let m2s = sp * phi[a][b] - m1s * lnsin;
                        sb[a][b] = r * m1s + h * m2s;
                        let m1d = 0.5 * sp * tr_j[a][b];
                        let m2d = sp * tr[a][b] - self.q0[a][b] * cot - m1d * lnsin;
                        db[a][b] = c * self.q0[a][b] + r * m1d + h * m2d;
                    }
                }
                (db, sb)
            })
            .collect()
    }

    /// Self-interaction blocks at node `j` from the curvature limits.
    fn diagonal(&self, grid: &NystromGrid, j: usize, r: f64, h: f64) -> (M2, M2) {
        let sp = grid.samples.speeds[j];
        let d1 = grid.tangents[j];
        let d2 = grid.second[j];
        let tt = [d1[0] / sp, d1[1] / sp];
        let kappa = grid.curvature[j];
        let q = (d1[0] * d2[0] + d1[1] * d2[1]) / (2.0 * sp * sp);
        let c = self.k.c;
        let mut sb = ZERO2;
        let mut db = ZERO2;
        for a in 0..2 {
            for b in 0..2 {
                let id = if a == b { 1.0 } else { 0.0 };
                let m1s = 0.5 * self.a_log0 * sp * id;
                let m2s = (self.a_log0 * sp.ln() + self.a_rest0) * sp * id + self.b0 * sp * tt[a] * tt[b];
                sb[a][b] = Complex64::from(r * m1s) + h * m2s;
                let m2d = -0.5 * kappa * sp * (c / (2.0 * PI) * id + (1.0 - c) / PI * tt[a] * tt[b]);
                db[a][b] = Complex64::new(h * m2d, 0.0);
            }
        }
        let qq = h * c / (2.0 * PI) * q;
        db[0][1] -= qq;
        db[1][0] += qq;
        (db, sb)
    }
}

/// Both boundary operators `D` and `S` as `2n x 2n` matrices, unknowns
/// ordered node by node.
pub fn assemble_operators(medium: &ElasticMedium, curve: &BoundaryCurve, n: usize) -> Result<(Matrix, Matrix)> {
    let grid = NystromGrid::new(curve, n)?;
    let sp = Splitter::new(medium);
    let rows: Vec<Vec<(M2, M2)>> = par::map_range(n, |i| node_row(&sp, &grid, i));
    let fill = |which: usize| {
        Matrix::from_rows(2 * n, |row, out| {
            let (i, a) = (row / 2, row % 2);
            for (j, blk) in rows[i].iter().enumerate() {
                let m = if which == 0 { &blk.0 } else { &blk.1 };
                out[2 * j] = m[a][0];
                out[2 * j + 1] = m[a][1];
            }
        })
    };
    Ok((fill(0), fill(1)))
}

fn node_row(sp: &Splitter, grid: &NystromGrid, i: usize) -> Vec<(M2, M2)> {
    let n = grid.n();
    let h = 2.0 * PI / n as f64;
    let logs: Vec<f64> = (0..n).map(|m| log_weight(n, h * m as f64)).collect();
    let cauchys: Vec<f64> = (0..n).map(|m| cauchy_weight(n, h * m as f64)).collect();
    let target = Target { t: grid.samples.t[i], x: grid.samples.points[i], node: Some(i) };
    sp.row(grid, &target, &|j| logs[(i + n - j) % n], &|j| cauchys[(i + n - j) % n])
}

/// Matrix of `(1/2) I + D - i eta S`.
pub fn assemble(medium: &ElasticMedium, curve: &BoundaryCurve, n: usize, eta: f64) -> Result<Matrix> {
    let grid = NystromGrid::new(curve, n)?;
    assemble_on(medium, &grid, eta)
}

fn assemble_on(medium: &ElasticMedium, grid: &NystromGrid, eta: f64) -> Result<Matrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(invalid("eta", format!("coupling parameter must be positive, got {eta}")));
    }
    let n = grid.n();
    let sp = Splitter::new(medium);
    let h = 2.0 * PI / n as f64;
    let logs: Vec<f64> = (0..n).map(|m| log_weight(n, h * m as f64)).collect();
    let cauchys: Vec<f64> = (0..n).map(|m| cauchy_weight(n, h * m as f64)).collect();
    let ieta = I * eta;
    Ok(Matrix::from_row_chunks(2 * n, 2, |i, out| {
        let target = Target { t: grid.samples.t[i], x: grid.samples.points[i], node: Some(i) };
        let blocks = sp.row(grid, &target, &|j| logs[(i + n - j) % n], &|j| cauchys[(i + n - j) % n]);
        let (top, bottom) = out.split_at_mut(2 * n);
        for (a, row) in [top, bottom].into_iter().enumerate() {
            for (j, (d, s)) in blocks.iter().enumerate() {
                for b in 0..2 {
                    row[2 * j + b] = d[a][b] - ieta * s[a][b];
                }
            }
            row[2 * i + a] += 0.5;
        }
    }))
}

/// Options for [`solve_dirichlet_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Coupling parameter; `None` selects `omega_s`.
    pub eta: Option<f64>,
    /// Whether to evaluate the off-node boundary residual.
    pub residual: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { eta: None, residual: true }
    }
}

/// Solved scattering problem.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub medium: ElasticMedium,
    pub grid: NystromGrid,
    pub density: DensityVector,
    pub incident: IncidentPlaneWave,
    pub eta: f64,
    pub condition: f64,
    /// Largest `|u_inc + u_scat|` over `4n` off-node boundary points, or NaN
    /// when not evaluated.
    pub residual: f64,
    kernel: Kernel2d,
}

/// Solves with `eta = omega_s` and reports the boundary residual.
pub fn solve_dirichlet(
    medium: &ElasticMedium,
    curve: &BoundaryCurve,
    incident: &IncidentPlaneWave,
    n: usize,
) -> Result<ScatteringSolution> {
    solve_dirichlet_with(medium, curve, incident, n, SolveOptions::default())
}

pub fn solve_dirichlet_with(
    medium: &ElasticMedium,
    curve: &BoundaryCurve,
    incident: &IncidentPlaneWave,
    n: usize,
    options: SolveOptions,
) -> Result<ScatteringSolution> {
    let grid = NystromGrid::new(curve, n)?;
    let eta = options.eta.unwrap_or(medium.wavenumbers().omega_s);
    let a = assemble_on(medium, &grid, eta)?;
    let rhs: Vec<Complex64> = grid
        .samples
        .points
        .iter()
        .flat_map(|&x| {
            let u = incident.evaluate(medium, x);
            [-u[0], -u[1]]
        })
        .collect();
    let lu = Lu::factor(a)?;
    let (x, condition) = lu.solve_checked(&rhs)?;
    let density = x.chunks(2).map(|p| [p[0], p[1]]).collect();
    let mut sol = ScatteringSolution {
        medium: *medium,
        grid,
        density,
        incident: *incident,
        eta,
        condition,
        residual: f64::NAN,
        kernel: Kernel2d::new(medium),
    };
    if options.residual {
        sol.residual = sol.boundary_residual();
    }
    Ok(sol)
}

/// Doubles `n` from `n0` until the boundary residual drops below `tol`.
pub fn solve_adaptive(
    medium: &ElasticMedium,
    curve: &BoundaryCurve,
    incident: &IncidentPlaneWave,
    n0: usize,
    n_max: usize,
    tol: f64,
) -> Result<ScatteringSolution> {
    let mut n = n0;
    loop {
        let sol = solve_dirichlet(medium, curve, incident, n)?;
        if sol.residual < tol {
            return Ok(sol);
        }
        if 2 * n > n_max {
            return Err(Error::Accuracy { residual: sol.residual, tolerance: tol, n });
        }
        n *= 2;
    }
}

impl ScatteringSolution {
    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.grid.curve
    }

    pub fn kernel(&self) -> &Kernel2d {
        &self.kernel
    }

    /// Scattered field, or one of its parts, without the distance check.
    pub fn scattered_part_unchecked(&self, x: Vec2, part: Part) -> [Complex64; 2] {
        let s = &self.grid.samples;
        let d = layer_potential_part(LayerKind::Double, part, &self.kernel, s, &self.density, x);
        let sl = layer_potential_part(LayerKind::Single, part, &self.kernel, s, &self.density, x);
        let ie = I * self.eta;
        [d[0] - ie * sl[0], d[1] - ie * sl[1]]
    }

    /// `u_scat(x)` at an exterior point at least one node spacing from the boundary.
    pub fn evaluate_scattered(&self, x: Vec2) -> Result<[Complex64; 2]> {
        check_target(self.curve(), &self.grid.samples, x)?;
        Ok(self.scattered_part_unchecked(x, Part::Both))
    }

    /// Total field `u_inc + u_scat`.
    pub fn evaluate_field(&self, x: Vec2) -> Result<[Complex64; 2]> {
        let s = self.evaluate_scattered(x)?;
        let i = self.incident.evaluate(&self.medium, x);
        Ok([s[0] + i[0], s[1] + i[1]])
    }

    /// Largest `|u_inc + u_scat|` at the `4n` boundary points
    /// `t = 2 pi (k + 1/2) / (4n)`, none of which is a node.
    pub fn boundary_residual(&self) -> f64 {
        let n = self.n();
        let m = 4 * n;
        let hm = 2.0 * PI / m as f64;
        // Offsets t_k - t_j are all of the form 2 pi (l + 1/2) / (4n).
        let off = |l: usize| hm * (l as f64 + 0.5);
        let logs: Vec<f64> = (0..m).map(|l| log_weight(n, off(l))).collect();
        let cauchys: Vec<f64> = (0..m).map(|l| cauchy_weight(n, off(l))).collect();
        let interp: Vec<f64> = (0..m).map(|l| trig_basis(n, off(l))).collect();
        let sp = Splitter::new(&self.medium);
        let ie = I * self.eta;
        par::max_range(m, |k| {
            let t = off(k);
            let idx = |j: usize| (k + m - 4 * j) % m;
            let target = Target { t, x: self.grid.curve.point(t), node: None };
            let blocks = sp.row(&self.grid, &target, &|j| logs[idx(j)], &|j| cauchys[idx(j)]);
            let mut u = self.incident.evaluate(&self.medium, target.x);
            for (j, (d, s)) in blocks.iter().enumerate() {
                let f = self.density[j];
                let w = interp[idx(j)];
                for a in 0..2 {
                    u[a] += 0.5 * w * f[a];
                    for b in 0..2 {
                        u[a] += (d[a][b] - ie * s[a][b]) * f[b];
                    }
                }
            }
            (u[0].norm_sqr() + u[1].norm_sqr()).sqrt()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{navier_phi, traction_kernel};
    use crate::medium::WaveKind;

    fn medium() -> ElasticMedium {
        ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
    }

    /// Trace and traction of `y -> Phi(y, z) e_c` on the grid.
    fn source_data(m: &ElasticMedium, grid: &NystromGrid, z: Vec2, c: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut u = Vec::new();
        let mut t = Vec::new();
        for (y, nu) in grid.samples.points.iter().zip(&grid.samples.normals) {
            let p = navier_phi(m, y, &z, 2).unwrap();
            u.extend([p.get(0, c), p.get(1, c)]);
            let tr = traction_kernel(m, y, nu, &z).unwrap();
            t.extend([tr.get(c, 0), tr.get(c, 1)]);
        }
        (u, t)
    }

    fn green_defect(m: &ElasticMedium, curve: &BoundaryCurve, n: usize, z: Vec2, sign: f64) -> f64 {
        let (d, s) = assemble_operators(m, curve, n).unwrap();
        let grid = NystromGrid::new(curve, n).unwrap();
        let mut worst = 0.0f64;
        for c in 0..2 {
            let (u, t) = source_data(m, &grid, z, c);
            let du = d.mul_vec(&u);
            let st = s.mul_vec(&t);
            let scale = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for k in 0..u.len() {
                worst = worst.max((du[k] + sign * 0.5 * u[k] - st[k]).norm() / scale);
            }
        }
        worst
    }

    #[test]
    fn green_identity_exterior_and_interior() {
        let m = medium();
        for curve in [BoundaryCurve::kite(), BoundaryCurve::radial(1.0, 0.08, 3).unwrap()] {
            // Radiating field from a source inside: (D - I/2) u = S T u.
            let e = green_defect(&m, &curve, 128, [0.1, 0.2], -1.0);
            assert!(e < 1e-9, "exterior: {e}");
            // Field regular inside, source outside: (D + I/2) v = S T v.
            let e = green_defect(&m, &curve, 128, [2.5, 1.5], 1.0);
            assert!(e < 1e-9, "interior: {e}");
        }
    }

    #[test]
    fn diagonal_limits_are_continuous() {
        // The smooth remainders evaluated just off a node must approach the
        // closed-form diagonal values.
        let m = medium();
        let curve = BoundaryCurve::kite();
        let grid = NystromGrid::new(&curve, 64).unwrap();
        let sp = Splitter::new(&m);
        let n = grid.n();
        let h = 2.0 * PI / n as f64;
        for j in [0usize, 7, 21, 40] {
            let (dd, sd) = sp.diagonal(&grid, j, 0.0, h);
            let tj = grid.samples.t[j];
            let mut prev = f64::INFINITY;
            for eps in [1e-3, 1e-4, 1e-5] {
                let t = tj + eps;
                let target = Target { t, x: curve.point(t), node: None };
                let blocks = sp.row(&grid, &target, &|_| 0.0, &|_| 0.0);
                let (d, s) = blocks[j];
                let mut err = 0.0f64;
                for a in 0..2 {
                    for b in 0..2 {
                        err = err.max((d[a][b] - dd[a][b]).norm()).max((s[a][b] - sd[a][b]).norm());
                    }
                }
                assert!(err < 50.0 * eps, "node {j}, eps {eps}: {err}");
                assert!(err < prev);
                prev = err;
            }
        }
    }

    #[test]
    fn assembly_is_deterministic_and_validates() {
        let m = medium();
        let c = BoundaryCurve::kite();
        let a = assemble(&m, &c, 32, 2.0).unwrap();
        let b = assemble(&m, &c, 32, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(assemble(&m, &c, 31, 2.0).is_err());
        assert!(assemble(&m, &c, 30, 2.0).is_err());
        assert!(assemble(&m, &c, 32, 0.0).is_err());
    }

    #[test]
    fn zero_incident_gives_zero_density() {
        let m = medium();
        let c = BoundaryCurve::disc(1.0).unwrap();
        let w = IncidentPlaneWave::longitudinal(0.0).scaled(ZERO);
        let sol = solve_dirichlet(&m, &c, &w, 32).unwrap();
        assert!(sol.density.iter().all(|p| p[0] == ZERO && p[1] == ZERO));
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn kite_boundary_condition_and_linearity() {
        let m = medium();
        let c = BoundaryCurve::kite();
        let w = IncidentPlaneWave::new(WaveKind::Transversal, 0.4, 0.3).unwrap();
        let sol = solve_dirichlet(&m, &c, &w, 128).unwrap();
        assert!(sol.residual < 1e-5, "{}", sol.residual);
        let f = Complex64::new(0.3, -1.7);
        let sol2 = solve_dirichlet_with(&m, &c, &w.scaled(f), 128, SolveOptions { residual: false, ..Default::default() }).unwrap();
        for (p, q) in sol.density.iter().zip(&sol2.density) {
            for k in 0..2 {
                assert!((p[k] * f - q[k]).norm() <= 1e-13 * (1.0 + q[k].norm()) * 10.0);
            }
        }
        assert!(matches!(sol.evaluate_field([0.0, 0.0]), Err(Error::InteriorPoint)));
        assert!(matches!(sol.evaluate_field([1.001, 0.0]), Err(Error::NearSingular { .. })));
    }
}
