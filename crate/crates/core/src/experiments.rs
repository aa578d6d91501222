//! Shape-stability sweeps: far-field and near-field errors against the
//! distances between a reference obstacle and its perturbations, and a fit
//! of the log-log model `d_tilde ~ C (ln ln (1/eps0))^(-beta)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::bie::{solve_dirichlet, ScatteringSolution};
use crate::error::{invalid, Error, Result};
use crate::farfield::{csv_err, far_field, farfield_error, fmt_f64, near_field_errors, FarFieldPattern};
use crate::geom2::{norm, Vec2};
use crate::geometry::{
    area_symmetric_difference, closeness_check, distances, make_curve, AreaMethod, BoundaryCurve, CurveFamily, RegularityParams,
};
use crate::medium::{ElasticMedium, IncidentPlaneWave};
use crate::par;

/// Column names of the record CSV.
pub const RECORD_HEADER: [&str; 12] =
    ["amplitude", "d", "d_hat", "d_tilde", "eps0", "eps_near", "eps_annulus", "sym_diff_area", "closeness_ok", "n", "residual", "seed"];

/// Fit records need `eps0 <= e^{-e} / 2`.
pub fn fit_threshold() -> f64 {
    (-std::f64::consts::E).exp() / 2.0
}

/// Smallest number of records accepted by [`loglog_fit`].
pub const MIN_FIT_RECORDS: usize = 4;

/// One perturbed pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub amplitude: f64,
    pub d: f64,
    pub d_hat: f64,
    pub d_tilde: f64,
    pub eps0: f64,
    pub eps_near: f64,
    pub eps_annulus: f64,
    pub sym_diff_area: f64,
    pub closeness_ok: bool,
    pub n: usize,
    /// Larger of the two boundary residuals.
    pub residual: f64,
    pub seed: u64,
}

/// Sweep configuration. The reference obstacle is `base`; the perturbed one
/// is the radial family about the same center and radius with
/// `delta = amplitude` and `m = mode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: CurveFamily,
    pub mode: u32,
    pub amplitudes: Vec<f64>,
    pub n: usize,
    pub directions: usize,
    pub probes: usize,
    /// Boundary samples per curve for the distances.
    pub distance_samples: usize,
    /// Center of the measurement ball.
    pub x0: Vec2,
    /// Radius of the measurement ball.
    pub s_tilde: f64,
    pub seed: u64,
}

impl SweepSpec {
    fn perturbed(&self, amplitude: f64) -> Result<BoundaryCurve> {
        let (radius, center) = match self.base {
            CurveFamily::Disc { radius, center } => (radius, center),
            CurveFamily::RadialPerturbation { radius, center, .. } => (radius, center),
            other => return Err(invalid("base", format!("sweeps perturb discs or radial curves, got {other:?}"))),
        };
        make_curve(CurveFamily::RadialPerturbation { radius, delta: amplitude, m: self.mode, center })
    }

    /// Checks the amplitude list and the probe placement against `params`.
    pub fn validate(&self, params: &RegularityParams, medium: &ElasticMedium) -> Result<()> {
        params.validate(medium, 2)?;
        let a = &self.amplitudes;
        if a.is_empty() || a[0] < 0.0 || a.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("amplitudes", "must be a nonempty strictly ascending list starting at or above 0"));
        }
        if !(self.s_tilde > 0.0) {
            return Err(invalid("s_tilde", "must be positive"));
        }
        if norm(self.x0) < params.big_r + 1.0 + self.s_tilde {
            return Err(invalid("x0", format!("|x0| must be at least R + 1 + s_tilde = {}", params.big_r + 1.0 + self.s_tilde)));
        }
        let base = make_curve(self.base)?;
        if !params.encloses(&base) {
            return Err(invalid("base", "reference obstacle leaves the ball of radius R"));
        }
        for &amp in a {
            if !params.encloses(&self.perturbed(amp)?) {
                return Err(invalid("amplitudes", format!("perturbation {amp} leaves the ball of radius R")));
            }
        }
        Ok(())
    }
}

/// Records in amplitude order plus the fit over the admissible ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<ExperimentRecord>,
    pub fit: Option<FitResult>,
    /// Why the fit is missing, if it is.
    pub fit_error: Option<Error>,
    /// First solver failure; records after it are dropped.
    pub failure: Option<Error>,
}

fn record(
    spec: &SweepSpec,
    params: &RegularityParams,
    medium: &ElasticMedium,
    reference: &(ScatteringSolution, FarFieldPattern),
    amplitude: f64,
) -> Result<ExperimentRecord> {
    let base = make_curve(spec.base)?;
    let curve = spec.perturbed(amplitude)?;
    let (sol0, ff0) = reference;
    let sol = solve_dirichlet(medium, &curve, &sol0.incident, spec.n)?;
    let ff = far_field(&sol, spec.directions)?;
    let eps0 = farfield_error(ff0, &ff)?;
    let near = near_field_errors(sol0, &sol, spec.x0, spec.s_tilde, spec.probes, spec.seed)?;
    let dist = distances(&base, &curve, spec.distance_samples)?;
    let area = area_symmetric_difference(&base, &curve, AreaMethod::Quadrature)?.value;
    Ok(ExperimentRecord {
        amplitude,
        d: dist.d,
        d_hat: dist.d_hat,
        d_tilde: dist.d_tilde,
        eps0,
        eps_near: near.eps,
        eps_annulus: near.eps1,
        sym_diff_area: area,
        closeness_ok: closeness_check(area, params, medium, 2)?,
        n: spec.n,
        residual: sol0.residual.max(sol.residual),
        seed: spec.seed,
    })
}

/// Solves the reference and every perturbation, records errors and
/// distances, and fits the log-log model.
pub fn stability_sweep(
    spec: &SweepSpec,
    params: &RegularityParams,
    medium: &ElasticMedium,
    incident: &IncidentPlaneWave,
) -> Result<SweepResult> {
    spec.validate(params, medium)?;
    let base = make_curve(spec.base)?;
    let sol0 = solve_dirichlet(medium, &base, incident, spec.n)?;
    let ff0 = far_field(&sol0, spec.directions)?;
    let reference = (sol0, ff0);
    let results = par::map_slice(&spec.amplitudes, |&a| record(spec, params, medium, &reference, a));
    let mut records = Vec::new();
    let mut failure = None;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let (fit, fit_error) = match loglog_fit(&records) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e)),
    };
    Ok(SweepResult { records, fit, fit_error, failure })
}

/// Least-squares fit of `ln d_tilde = ln C - beta ln(ln ln(1/eps0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub c: f64,
    pub beta: f64,
    /// Largest relative deviation `|d_tilde - model| / model` over the
    /// records used.
    pub residual: f64,
    pub used: usize,
    /// Set when `|beta| < 1e-6`.
    pub degenerate: bool,
}

impl FitResult {
    pub fn model(&self, eps0: f64) -> f64 {
        self.c * (1.0 / eps0).ln().ln().powf(-self.beta)
    }
}

/// Whether a record enters the fit.
pub fn fit_admissible(r: &ExperimentRecord) -> bool {
    r.closeness_ok && r.eps0 > 0.0 && r.eps0 <= fit_threshold() && r.d_tilde > 0.0
}

pub fn loglog_fit(records: &[ExperimentRecord]) -> Result<FitResult> {
    let used: Vec<&ExperimentRecord> = records.iter().filter(|r| fit_admissible(r)).collect();
    if used.len() < MIN_FIT_RECORDS {
        return Err(Error::TooFewRecords { got: used.len(), min: MIN_FIT_RECORDS });
    }
    let xs: Vec<f64> = used.iter().map(|r| (1.0 / r.eps0).ln().ln().ln()).collect();
    let ys: Vec<f64> = used.iter().map(|r| r.d_tilde.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-300) {
        return Err(invalid("records", "all eps0 coincide; the fit is undetermined"));
    }
    let slope = sxy / sxx;
    let fit = FitResult { c: (my - slope * mx).exp(), beta: -slope, residual: 0.0, used: used.len(), degenerate: slope.abs() < 1e-6 };
    let residual = used.iter().map(|r| (r.d_tilde - fit.model(r.eps0)).abs() / fit.model(r.eps0)).fold(0.0, f64::max);
    Ok(FitResult { residual, ..fit })
}

/// `(eps0, eps, eps1)` per record and whether `eps <= eps1` everywhere.
pub fn far_to_near_comparison(records: &[ExperimentRecord]) -> (Vec<(f64, f64, f64)>, bool) {
    let rows: Vec<(f64, f64, f64)> = records.iter().map(|r| (r.eps0, r.eps_near, r.eps_annulus)).collect();
    let ok = rows.iter().all(|t| t.1 <= t.2);
    (rows, ok)
}

/// Writes records as CSV after `# ` comment lines.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], comments: &[String], out: W) -> Result<()> {
    let mut out = out;
    for c in comments {
        writeln!(out, "# {c}").map_err(csv_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_HEADER).map_err(csv_err)?;
    for r in records {
        let f = [r.amplitude, r.d, r.d_hat, r.d_tilde, r.eps0, r.eps_near, r.eps_annulus, r.sym_diff_area].map(fmt_f64);
        let mut row: Vec<String> = f.to_vec();
        row.push(r.closeness_ok.to_string());
        row.push(r.n.to_string());
        row.push(fmt_f64(r.residual));
        row.push(r.seed.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(RECORD_HEADER) {
        return Err(Error::Csv(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|rec| rec.map_err(csv_err)).collect()
}

/// Sweep over the radial family on the unit disc used by the harness:
/// 8 amplitudes from 0 to 0.0175 in mode 3, `n = 128`, 360 directions.
pub fn default_sweep_spec(seed: u64) -> SweepSpec {
    SweepSpec {
        base: CurveFamily::Disc { radius: 1.0, center: [0.0, 0.0] },
        mode: 3,
        amplitudes: (0..8).map(|k| 0.0025 * k as f64).collect(),
        n: 128,
        directions: 360,
        probes: 400,
        distance_samples: 2048,
        x0: [3.5, 0.0],
        s_tilde: 0.5,
        seed,
    }
}

/// A-priori data matching [`default_sweep_spec`] for `lambda = 2, mu = 1,
/// rho = 1, omega = 2`, where `H1 = pi / 32`.
pub fn default_regularity() -> RegularityParams {
    RegularityParams { r: 0.5, l: 2.0, big_r: 2.0, alpha: 0.5, h0: 0.09 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(eps0: f64, d_tilde: f64) -> ExperimentRecord {
        ExperimentRecord {
            amplitude: 0.0,
            d: 0.0,
            d_hat: 0.0,
            d_tilde,
            eps0,
            eps_near: 0.0,
            eps_annulus: 0.0,
            sym_diff_area: 0.0,
            closeness_ok: true,
            n: 64,
            residual: 0.0,
            seed: 0,
        }
    }

    #[test]
    fn fit_recovers_its_own_model() {
        let recs: Vec<ExperimentRecord> =
            [1e-3, 1e-5, 1e-8, 1e-12, 1e-20].iter().map(|&e| synthetic(e, 2.0 * (1.0 / e as f64).ln().ln().powf(-0.5))).collect();
        let f = loglog_fit(&recs).unwrap();
        assert!((f.c - 2.0).abs() < 1e-6 && (f.beta - 0.5).abs() < 1e-6, "{f:?}");
        assert!(f.residual < 1e-10 && !f.degenerate);
    }

    #[test]
    fn constant_distance_is_degenerate() {
        let recs: Vec<ExperimentRecord> = [1e-3, 1e-5, 1e-8, 1e-12].iter().map(|&e| synthetic(e, 0.3)).collect();
        let f = loglog_fit(&recs).unwrap();
        assert!(f.degenerate && f.beta.abs() < 1e-6);
    }

    #[test]
    fn too_few_admissible_records() {
        let mut recs: Vec<ExperimentRecord> = [1e-3, 1e-5, 0.5].iter().map(|&e| synthetic(e, 0.3)).collect();
        recs.push(ExperimentRecord { closeness_ok: false, ..synthetic(1e-9, 0.1) });
        assert!(matches!(loglog_fit(&recs), Err(Error::TooFewRecords { got: 2, min: 4 })));
    }

    #[test]
    fn records_round_trip_through_csv() {
        let recs = vec![
            ExperimentRecord { amplitude: 0.1, eps_near: 1.0 / 3.0, seed: 42, ..synthetic(1e-3, 0.25) },
            ExperimentRecord { closeness_ok: false, ..synthetic(2e-3, std::f64::consts::PI) },
        ];
        let mut buf = Vec::new();
        write_records_csv(&recs, &["config: {}".into()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\namplitude,d,d_hat,d_tilde,eps0,eps_near,eps_annulus,sym_diff_area,closeness_ok,n,residual,seed\n"));
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), recs);
    }

    #[test]
    fn zero_amplitude_sweep_gives_identical_pair() {
        let medium = ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap();
        let spec = SweepSpec { amplitudes: vec![0.0], n: 64, directions: 64, probes: 50, distance_samples: 256, ..default_sweep_spec(3) };
        let res = stability_sweep(&spec, &default_regularity(), &medium, &IncidentPlaneWave::longitudinal(0.0)).unwrap();
        assert_eq!(res.records.len(), 1);
        let r = res.records[0];
        assert_eq!((r.eps0, r.d_tilde, r.eps_near, r.eps_annulus), (0.0, 0.0, 0.0, 0.0));
        assert!(r.closeness_ok && res.failure.is_none());
        assert!(matches!(res.fit_error, Some(Error::TooFewRecords { .. })));
    }

    #[test]
    fn invalid_sweeps_are_refused() {
        let medium = ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap();
        let wave = IncidentPlaneWave::longitudinal(0.0);
        let p = default_regularity();
        let bad_order = SweepSpec { amplitudes: vec![0.0, 0.02, 0.01], ..default_sweep_spec(0) };
        assert!(stability_sweep(&bad_order, &p, &medium, &wave).is_err());
        let near = SweepSpec { x0: [2.0, 0.0], ..default_sweep_spec(0) };
        assert!(stability_sweep(&near, &p, &medium, &wave).is_err());
        let big_h0 = RegularityParams { h0: 0.2, ..p };
        assert!(matches!(stability_sweep(&default_sweep_spec(0), &big_h0, &medium, &wave), Err(Error::InvalidAprioriData { .. })));
    }
}
