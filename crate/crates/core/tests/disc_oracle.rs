mod common;

use elasto_core::bie::solve_dirichlet;
use elasto_core::farfield::{far_field, farfield_error};
use elasto_core::geometry::BoundaryCurve;
use elasto_core::medium::IncidentPlaneWave;

use common::{disc_far_field, medium};

#[test]
fn oracle_converges_in_the_mode_count() {
    let m = medium();
    let wave = IncidentPlaneWave::longitudinal(0.0);
    let a = disc_far_field(&m, 1.0, &wave, 128, 30);
    let b = disc_far_field(&m, 1.0, &wave, 128, 45);
    assert!(farfield_error(&a, &b).unwrap() < 1e-13 * a.norm());
}

#[test]
fn disc_far_field_matches_mode_matching() {
    let m = medium();
    for wave in [IncidentPlaneWave::longitudinal(0.0), IncidentPlaneWave::longitudinal(1.1), IncidentPlaneWave::transversal(0.4)] {
        let oracle = disc_far_field(&m, 1.0, &wave, 180, 40);
        let mut last = f64::INFINITY;
        for n in [32, 64, 128] {
            let sol = solve_dirichlet(&m, &BoundaryCurve::disc(1.0).unwrap(), &wave, n).unwrap();
            let err = farfield_error(&far_field(&sol, 180).unwrap(), &oracle).unwrap() / oracle.norm();
            assert!(err < last || err < 1e-12, "n={n}: {err}");
            last = err;
        }
        assert!(last < 1e-8, "{last}");
    }
}

#[test]
fn translated_disc_far_field_picks_up_the_phase_shift() {
    // Translating the obstacle by v multiplies the scattered field of the
    // translated incident wave; check against the oracle through the
    // transformation u_inf'(x) = e^{i k d.v} e^{-i k_a x.v} u_inf(x).
    let m = medium();
    let w = m.wavenumbers();
    let wave = IncidentPlaneWave::longitudinal(0.5);
    let v = [0.3, -0.2];
    let oracle = disc_far_field(&m, 1.0, &wave, 96, 40);
    let curve = BoundaryCurve::disc(1.0).unwrap().translated(v);
    let sol = solve_dirichlet(&m, &curve, &wave, 128).unwrap();
    let ff = far_field(&sol, 96).unwrap();
    let d = wave.direction();
    let shift = num_complex::Complex64::from_polar(1.0, w.omega_p * (d[0] * v[0] + d[1] * v[1]));
    for k in 0..96 {
        let x = ff.direction(k);
        let xv = x[0] * v[0] + x[1] * v[1];
        let p = oracle.up[k] * shift * num_complex::Complex64::from_polar(1.0, -w.omega_p * xv);
        let s = oracle.us[k] * shift * num_complex::Complex64::from_polar(1.0, -w.omega_s * xv);
        assert!((p - ff.up[k]).norm() < 1e-8 && (s - ff.us[k]).norm() < 1e-8, "k={k}");
    }
}
