//! Bessel and Hankel functions of integer order and positive real argument.
//!
//! Three regimes, split by argument:
//!
//! * `x <= 2`: ascending power series for `J_n`, and the logarithmic series
//!   for `Y_0`, `Y_1`.
//! * `2 < x < 25`: Miller's backward recurrence for `J_k`, normalised with
//!   `J_0 + 2 sum J_2k = 1`; `Y_0`, `Y_1` from their Neumann series in the
//!   same `J_k`.
//! * `x >= 25`: Hankel's asymptotic expansion for orders 0 and 1. The smallest
//!   term of the divergent series is about `exp(-2x)`, far below rounding.
//!
//! Higher orders use upward recurrence for `Y_n` (always stable) and for
//! `J_n` while `n < x`; above that `J_n` comes from Miller's algorithm.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: u32 = 200;
/// Arguments at or below this use ascending series.
pub const SERIES_LIMIT: f64 = 2.0;
/// Arguments at or above this use the asymptotic expansion.
pub const ASYMPTOTIC_LIMIT: f64 = 25.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `J_order(x)` and `Y_order(x)`.
pub fn bessel_jy(order: u32, x: f64) -> Result<(f64, f64)> {
    check_args(order, x)?;
    let (j0, j1, y0, y1) = base(x);
    let y = match order {
        0 => y0,
        1 => y1,
        _ => {
            let (mut prev, mut cur) = (y0, y1);
            for k in 1..order {
                let next = 2.0 * k as f64 / x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    };
    if !y.is_finite() {
        return Err(Error::Overflow(format!("Y_{order}({x}) exceeds the floating-point range")));
    }
    let j = match order {
        0 => j0,
        1 => j1,
        _ if x <= SERIES_LIMIT => series_j(order, x),
        _ if (order as f64) < x => {
            let (mut prev, mut cur) = (j0, j1);
            for k in 1..order {
                let next = 2.0 * k as f64 / x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
        _ => miller_j(order, x),
    };
    Ok((j, y))
}

/// `H^(1)_order(x) = J_order(x) + i Y_order(x)`.
pub fn hankel1(order: u32, x: f64) -> Result<Complex64> {
    let (j, y) = bessel_jy(order, x)?;
    Ok(Complex64::new(j, y))
}

/// `[J_0(x), ..., J_nmax(x)]`.
pub fn bessel_j_upto(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_args(nmax, x)?;
    (0..=nmax).map(|n| bessel_jy(n, x).map(|(j, _)| j)).collect()
}

/// `H^(1)_0`, `H^(1)_1`, `H^(1)_2` at `x > 0`, without argument checks.
/// This is the hot path of kernel evaluation.
#[inline]
pub fn hankel1_012(x: f64) -> [Complex64; 3] {
    debug_assert!(x > 0.0);
    let (j0, j1, y0, y1) = base(x);
    let h0 = Complex64::new(j0, y0);
    let h1 = Complex64::new(j1, y1);
    let h2 = h1 * (2.0 / x) - h0;
    [h0, h1, h2]
}

/// `H^(1)_0`, `H^(1)_1 + 2i/(pi x)` and `H^(1)_2 + 4i/(pi x^2)`: the Hankel
/// functions with their poles removed, accurate down to `x -> 0`. Kernel
/// combinations whose poles cancel analytically are evaluated from these.
#[inline]
pub fn hankel1_012_regular(x: f64) -> [Complex64; 3] {
    debug_assert!(x > 0.0);
    if x > SERIES_LIMIT {
        let [h0, h1, h2] = hankel1_012(x);
        let p1 = FRAC_2_PI / x;
        return [h0, h1 + Complex64::new(0.0, p1), h2 + Complex64::new(0.0, 2.0 * p1 / x)];
    }
    let half = 0.5 * x;
    let q = -half * half;
    let ln_half = half.ln();
    let (j0, _, y0, _) = base_series(x);
    // sum over k of (psi(k+1) + psi(k+n+1)) (-x^2/4)^k / (k!(k+n)!) for n = 1, 2
    let mut j1s = 1.0;
    let mut j2s = 0.5;
    let mut t1 = 1.0;
    let mut t2 = 0.5;
    let mut psi1 = -EULER_GAMMA;
    let mut psi2 = 1.0 - EULER_GAMMA;
    let mut psi3 = 1.5 - EULER_GAMMA;
    let mut s1 = (psi1 + psi2) * t1;
    let mut s2 = (psi1 + psi3) * t2;
    for k in 1..60 {
        let kf = k as f64;
        t1 *= q / (kf * (kf + 1.0));
        t2 *= q / (kf * (kf + 2.0));
        psi1 += 1.0 / kf;
        psi2 += 1.0 / (kf + 1.0);
        psi3 += 1.0 / (kf + 2.0);
        j1s += t1;
        j2s += t2;
        s1 += (psi1 + psi2) * t1;
        s2 += (psi1 + psi3) * t2;
        if t1.abs() < 1e-18 {
            break;
        }
    }
    let j1 = half * j1s;
    let j2 = half * half * j2s;
    let yt1 = FRAC_2_PI * ln_half * j1 - half * s1 / PI;
    let yt2 = -1.0 / PI + FRAC_2_PI * ln_half * j2 - half * half * s2 / PI;
    [Complex64::new(j0, y0), Complex64::new(j1, yt1), Complex64::new(j2, yt2)]
}

fn check_args(order: u32, x: f64) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order, max: MAX_ORDER });
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Bessel argument must be positive and finite, got {x}")));
    }
    Ok(())
}

/// `(J_0, J_1, Y_0, Y_1)` at `x > 0`.
fn base(x: f64) -> (f64, f64, f64, f64) {
    if x <= SERIES_LIMIT {
        base_series(x)
    } else if x < ASYMPTOTIC_LIMIT {
        base_miller(x)
    } else {
        base_asymptotic(x)
    }
}

fn series_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn base_series(x: f64) -> (f64, f64, f64, f64) {
    let half = 0.5 * x;
    let q = half * half;
    let log_term = (half.ln() + EULER_GAMMA) * FRAC_2_PI;

    // J0 and the harmonic-number series of Y0 share the factor (x^2/4)^k/(k!)^2.
    let mut t = 1.0;
    let mut j0 = 1.0;
    let mut ysum = 0.0;
    let mut harmonic = 0.0;
    for k in 1..60 {
        t *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        j0 -= sign * t;
        ysum += sign * harmonic * t;
        if t < 1e-18 {
            break;
        }
    }
    let y0 = log_term * j0 + FRAC_2_PI * ysum;

    // J1 and Y1: (x/2) sum (-x^2/4)^k / (k!(k+1)!) with digamma weights.
    let mut t = 1.0;
    let mut j1s = 1.0;
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut ys = psi_k1 + psi_k2;
    for k in 1..60 {
        t *= -q / (k * (k + 1)) as f64;
        psi_k1 += 1.0 / k as f64;
        psi_k2 += 1.0 / (k + 1) as f64;
        j1s += t;
        ys += (psi_k1 + psi_k2) * t;
        if t.abs() < 1e-18 {
            break;
        }
    }
    let j1 = half * j1s;
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * half.ln() * j1 - half * ys / PI;
    (j0, j1, y0, y1)
}

fn miller_start(n: u32, x: f64) -> usize {
    let top = (n as f64).max(x);
    let m = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    m + (m & 1)
}

/// Unnormalised downward recurrence from order `m`; fills `j[0..=m]` and
/// returns the normalisation `J_0 + 2 sum J_2k`.
fn miller_fill(x: f64, m: usize, j: &mut [f64]) -> f64 {
    let mut next = 0.0;
    let mut cur = 1e-30;
    j[m] = cur;
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        j[k - 1] = cur;
        if cur.abs() > 1e250 {
            for v in j[k - 1..=m].iter_mut() {
                *v *= 1e-250;
            }
            cur *= 1e-250;
            next *= 1e-250;
        }
    }
    let mut norm = j[0];
    let mut k = 2;
    while k <= m {
        norm += 2.0 * j[k];
        k += 2;
    }
    norm
}

fn base_miller(x: f64) -> (f64, f64, f64, f64) {
    let m = miller_start(1, x);
    let mut buf = [0.0f64; 128];
    let j = &mut buf[..m + 2];
    let norm = miller_fill(x, m, j);
    let scale = 1.0 / norm;
    let j0 = j[0] * scale;
    let j1 = j[1] * scale;

    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < m {
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let log_term = ((0.5 * x).ln() + EULER_GAMMA) * FRAC_2_PI;
    let y0 = log_term * j0 - 2.0 * FRAC_2_PI * s0 * scale;
    let y1 = log_term * j1 - FRAC_2_PI * j0 / x + FRAC_2_PI * s1 * scale;
    (j0, j1, y0, y1)
}

fn miller_j(n: u32, x: f64) -> f64 {
    let m = miller_start(n, x);
    let mut j = vec![0.0; m + 2];
    let norm = miller_fill(x, m, &mut j);
    j[n as usize] / norm
}

/// Hankel's expansion: returns `(P, Q)` for order `nu`.
fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * x);
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn base_asymptotic(x: f64) -> (f64, f64, f64, f64) {
    let amp = (FRAC_2_PI / x).sqrt();
    let (s, c) = x.sin_cos();
    // x - pi/4 and x - 3pi/4 without rounding the shifted argument.
    let c0 = (c + s) * FRAC_1_SQRT_2;
    let s0 = (s - c) * FRAC_1_SQRT_2;
    let c1 = (s - c) * FRAC_1_SQRT_2;
    let s1 = -(s + c) * FRAC_1_SQRT_2;
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    let j0 = amp * (p0 * c0 - q0 * s0);
    let y0 = amp * (p0 * s0 + q0 * c0);
    let j1 = amp * (p1 * c1 - q1 * s1);
    let y1 = amp * (p1 * s1 + q1 * c1);
    (j0, j1, y0, y1)
}
