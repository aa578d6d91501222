//! Reference solutions shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use elasto_core::farfield::FarFieldPattern;
use elasto_core::medium::{ElasticMedium, IncidentPlaneWave};
use elasto_core::special::hankel1;
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `H_m(x)` for any integer order.
fn hankel(m: i32, x: f64) -> Complex64 {
    let h = hankel1(m.unsigned_abs(), x).unwrap();
    if m < 0 && m % 2 != 0 {
        -h
    } else {
        h
    }
}

fn hankel_prime(m: i32, x: f64) -> Complex64 {
    hankel(m - 1, x) - m as f64 / x * hankel(m, x)
}

/// Far field of a rigid disc of radius `a` centred at the origin, by
/// separation of variables.
///
/// The scattered field is `grad phi + (d_y psi, -d_x psi)` with
/// `phi = sum A_m H_m(k_p r) e^{i m theta}` and
/// `psi = sum B_m H_m(k_s r) e^{i m theta}`. The radial and angular
/// components of the incident field on `r = a` are expanded numerically in
/// Fourier modes, and each mode gives a 2x2 system for `(A_m, B_m)`.
pub fn disc_far_field(medium: &ElasticMedium, a: f64, wave: &IncidentPlaneWave, directions: usize, modes: i32) -> FarFieldPattern {
    let w = medium.wavenumbers();
    let (kp, ks) = (w.omega_p, w.omega_s);
    let samples = 4 * modes as usize + 64;
    let mut ur = vec![Complex64::new(0.0, 0.0); samples];
    let mut ut = ur.clone();
    for j in 0..samples {
        let th = 2.0 * PI * j as f64 / samples as f64;
        let (c, s) = (th.cos(), th.sin());
        let u = wave.evaluate(medium, [a * c, a * s]);
        ur[j] = u[0] * c + u[1] * s;
        ut[j] = -u[0] * s + u[1] * c;
    }
    let coef = |v: &[Complex64], m: i32| -> Complex64 {
        v.iter()
            .enumerate()
            .map(|(j, x)| x * Complex64::from_polar(1.0, -(m as f64) * 2.0 * PI * j as f64 / samples as f64))
            .sum::<Complex64>()
            / samples as f64
    };
    let mut up = vec![Complex64::new(0.0, 0.0); directions];
    let mut us = up.clone();
    for m in -modes..=modes {
        let mf = m as f64;
        let m11 = kp * hankel_prime(m, kp * a);
        let m12 = I * mf / a * hankel(m, ks * a);
        let m21 = I * mf / a * hankel(m, kp * a);
        let m22 = -ks * hankel_prime(m, ks * a);
        let (r1, r2) = (-coef(&ur, m), -coef(&ut, m));
        let det = m11 * m22 - m12 * m21;
        let am = (r1 * m22 - m12 * r2) / det;
        let bm = (m11 * r2 - m21 * r1) / det;
        let phase = Complex64::from_polar(1.0, -(mf * PI / 2.0 + PI / 4.0));
        let fp = I * kp * (2.0 / (PI * kp)).sqrt() * phase * am;
        let fs = -I * ks * (2.0 / (PI * ks)).sqrt() * phase * bm;
        for k in 0..directions {
            let th = 2.0 * PI * k as f64 / directions as f64;
            let e = Complex64::from_polar(1.0, mf * th);
            up[k] += fp * e;
            us[k] += fs * e;
        }
    }
    FarFieldPattern::new(up, us).unwrap()
}

/// Default test medium: `lambda = 2, mu = 1, rho = 1, omega = 2`, so that
/// `omega_s = 2` and `omega_p = 1`.
pub fn medium() -> ElasticMedium {
    ElasticMedium::new(2.0, 1.0, 1.0, 2.0).unwrap()
}
