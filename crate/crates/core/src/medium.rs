//! Elastic medium parameters, wave numbers, the dimensional constants of the
//! closeness condition, and incident plane waves.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geom2::{dot, Vec2};

/// Homogeneous isotropic medium at a fixed frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MediumParams", into = "MediumParams")]
pub struct ElasticMedium {
    lambda: f64,
    mu: f64,
    rho: f64,
    omega: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MediumParams {
    lambda: f64,
    mu: f64,
    rho: f64,
    omega: f64,
}

impl TryFrom<MediumParams> for ElasticMedium {
    type Error = Error;
    fn try_from(p: MediumParams) -> Result<Self> {
        ElasticMedium::new(p.lambda, p.mu, p.rho, p.omega)
    }
}

impl From<ElasticMedium> for MediumParams {
    fn from(m: ElasticMedium) -> Self {
        MediumParams { lambda: m.lambda, mu: m.mu, rho: m.rho, omega: m.omega }
    }
}

/// Longitudinal and transversal wave numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumbers {
    pub omega_p: f64,
    pub omega_s: f64,
}

impl ElasticMedium {
    /// Validates `mu > 0`, `lambda + 2 mu > 0`, `rho > 0`, `omega > 0`.
    pub fn new(lambda: f64, mu: f64, rho: f64, omega: f64) -> Result<Self> {
        let finite = [lambda, mu, rho, omega].iter().all(|v| v.is_finite());
        if !finite {
            return Err(invalid("medium", "parameters must be finite"));
        }
        if !(mu > 0.0) {
            return Err(invalid("mu", format!("must be positive, got {mu}")));
        }
        if !(lambda + 2.0 * mu > 0.0) {
            return Err(invalid("lambda", format!("lambda + 2 mu must be positive, got {}", lambda + 2.0 * mu)));
        }
        if !(rho > 0.0) {
            return Err(invalid("rho", format!("must be positive, got {rho}")));
        }
        if !(omega > 0.0) {
            return Err(invalid("omega", format!("must be positive, got {omega}")));
        }
        Ok(Self { lambda, mu, rho, omega })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Same material at another frequency.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(self.lambda, self.mu, self.rho, omega)
    }

    /// `omega_p^2 = rho omega^2 / (lambda + 2 mu)`, `omega_s^2 = rho omega^2 / mu`.
    pub fn wavenumbers(&self) -> Wavenumbers {
        let rw2 = self.rho * self.omega * self.omega;
        Wavenumbers { omega_p: (rw2 / (self.lambda + 2.0 * self.mu)).sqrt(), omega_s: (rw2 / self.mu).sqrt() }
    }

    /// `rho omega^2`.
    pub fn rho_omega2(&self) -> f64 {
        self.rho * self.omega * self.omega
    }

    /// Shear wavelength `2 pi / omega_s`.
    pub fn shear_wavelength(&self) -> f64 {
        2.0 * PI / self.wavenumbers().omega_s
    }
}

pub fn wavenumbers(medium: &ElasticMedium) -> Wavenumbers {
    medium.wavenumbers()
}

fn gamma_half_integer(twice: u32) -> f64 {
    // Gamma(twice / 2) for twice >= 1.
    let mut g = if twice % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if twice % 2 == 0 { 1.0 } else { 0.5 };
    while 2.0 * x < twice as f64 - 0.5 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Volume of the unit ball in dimension `n`.
pub fn unit_ball_volume(n: u32) -> f64 {
    PI.powf(n as f64 / 2.0) / gamma_half_integer(n + 2)
}

/// `C(N) = |B_1|^((N-1)/N) / H^(N-1)(dB_1)`, the isoperimetric constant.
pub fn isoperimetric_constant(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    let vol = unit_ball_volume(n);
    let surface = n as f64 * vol;
    Ok(vol.powf((n as f64 - 1.0) / n as f64) / surface)
}

/// `H_1 = (min{2 mu, 2 mu + lambda} / (64 C(N)^2 rho omega^2))^(N/2)`.
pub fn closeness_constant(medium: &ElasticMedium, n: u32) -> Result<f64> {
    let c = isoperimetric_constant(n)?;
    let m = (2.0 * medium.mu).min(2.0 * medium.mu + medium.lambda);
    Ok((m / (64.0 * c * c * medium.rho_omega2())).powf(n as f64 / 2.0))
}

/// The same constant written through the wave numbers:
/// `(min{1/omega_p, sqrt(2)/omega_s} / (8 C(N)))^N`.
pub fn closeness_constant_via_wavenumbers(medium: &ElasticMedium, n: u32) -> Result<f64> {
    let c = isoperimetric_constant(n)?;
    let w = medium.wavenumbers();
    let m = (1.0 / w.omega_p).min(2f64.sqrt() / w.omega_s);
    Ok((m / (8.0 * c)).powi(n as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Longitudinal,
    Transversal,
}

/// Plane wave `c d e^{i omega_p d.x}` or `p e^{i omega_s d.x}` in the plane.
///
/// The transversal polarization is `p = c (-Q d)` with `Q` the rotation by
/// `pi/2`, so `p . d = 0` always holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentPlaneWave {
    kind: WaveKind,
    direction: Vec2,
    amplitude: Complex64,
}

impl IncidentPlaneWave {
    /// Unit-amplitude wave travelling at `angle` radians with complex phase
    /// `e^{i phase}`.
    pub fn new(kind: WaveKind, angle: f64, phase: f64) -> Result<Self> {
        if !angle.is_finite() || !phase.is_finite() {
            return Err(invalid("incident", "angle and phase must be finite"));
        }
        Ok(Self { kind, direction: [angle.cos(), angle.sin()], amplitude: Complex64::from_polar(1.0, phase) })
    }

    pub fn longitudinal(angle: f64) -> Self {
        Self::new(WaveKind::Longitudinal, angle, 0.0).expect("finite angle")
    }

    pub fn transversal(angle: f64) -> Self {
        Self::new(WaveKind::Transversal, angle, 0.0).expect("finite angle")
    }

    /// The wave multiplied by `factor`; drops the unit normalization, which
    /// linearity checks and the zero field need.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { amplitude: self.amplitude * factor, ..*self }
    }

    pub fn kind(&self) -> WaveKind {
        self.kind
    }
    pub fn direction(&self) -> Vec2 {
        self.direction
    }
    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    /// Constant vector multiplying the exponential: `c d` or `p`.
    pub fn polarization(&self) -> [Complex64; 2] {
        let d = self.direction;
        let v = match self.kind {
            WaveKind::Longitudinal => d,
            WaveKind::Transversal => [d[1], -d[0]],
        };
        [self.amplitude * v[0], self.amplitude * v[1]]
    }

    pub fn wavenumber(&self, medium: &ElasticMedium) -> f64 {
        let w = medium.wavenumbers();
        match self.kind {
            WaveKind::Longitudinal => w.omega_p,
            WaveKind::Transversal => w.omega_s,
        }
    }

    /// Field value at `x`.
    pub fn evaluate(&self, medium: &ElasticMedium, x: Vec2) -> [Complex64; 2] {
        let k = self.wavenumber(medium);
        let e = Complex64::from_polar(1.0, k * dot(self.direction, x));
        let p = self.polarization();
        [p[0] * e, p[1] * e]
    }

    /// Longitudinal and transversal parts at `x`; one of them is zero.
    pub fn evaluate_parts(&self, medium: &ElasticMedium, x: Vec2) -> ([Complex64; 2], [Complex64; 2]) {
        let u = self.evaluate(medium, x);
        let zero = [Complex64::new(0.0, 0.0); 2];
        match self.kind {
            WaveKind::Longitudinal => (u, zero),
            WaveKind::Transversal => (zero, u),
        }
    }
}

pub fn evaluate_incident(wave: &IncidentPlaneWave, medium: &ElasticMedium, x: Vec2) -> [Complex64; 2] {
    wave.evaluate(medium, x)
}
