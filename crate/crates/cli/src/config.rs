//! Run configuration: one JSON document, every section optional.

use std::path::PathBuf;

use elasto_core::bie::MIN_NODES;
use elasto_core::experiments::{default_regularity, default_sweep_spec, SweepSpec};
use elasto_core::farfield::MIN_DIRECTIONS;
use elasto_core::geometry::{BoundaryCurve, CurveFamily, RegularityParams, MIN_SAMPLES};
use elasto_core::medium::{ElasticMedium, IncidentPlaneWave, WaveKind};
use elasto_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Environment variable overriding `seed`.
pub const SEED_ENV: &str = "ELASTO_SEED";
/// Prefix of the config line echoed into every output file.
pub const CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub medium: ElasticMedium,
    pub incident: IncidentConfig,
    pub geometry: GeometryConfig,
    pub discretization: Discretization,
    pub sweep: SweepConfig,
    pub verify: VerifyConfig,
    pub seed: u64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            medium: ElasticMedium::new(2.0, 1.0, 1.0, 2.0).expect("valid default medium"),
            incident: IncidentConfig::default(),
            geometry: GeometryConfig::default(),
            discretization: Discretization::default(),
            sweep: SweepConfig::default(),
            verify: VerifyConfig::default(),
            seed: 7,
            output: PathBuf::from("elasto-out"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IncidentConfig {
    pub kind: WaveKind,
    /// Propagation angle in radians.
    pub angle: f64,
    pub phase: f64,
    /// Real factor on the unit-amplitude wave; 0 gives the zero field.
    pub amplitude: f64,
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self { kind: WaveKind::Longitudinal, angle: 0.0, phase: 0.0, amplitude: 1.0 }
    }
}

impl IncidentConfig {
    pub fn wave(&self) -> Result<IncidentPlaneWave> {
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter { name: "incident.amplitude", reason: "must be finite".into() });
        }
        Ok(IncidentPlaneWave::new(self.kind, self.angle, self.phase)?.scaled(self.amplitude.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub curve: BoundaryCurve,
    /// Second obstacle for `distances`.
    pub other: BoundaryCurve,
    pub regularity: RegularityParams,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            curve: BoundaryCurve::disc(1.0).expect("valid disc"),
            other: BoundaryCurve::radial(1.0, 0.05, 3).expect("valid perturbation"),
            regularity: default_regularity(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Discretization {
    pub n: usize,
    pub directions: usize,
    pub probes: usize,
    pub distance_samples: usize,
    /// Finite-difference step; `null` selects `1e-4` shear wavelengths.
    pub fd_step: Option<f64>,
}

impl Default for Discretization {
    fn default() -> Self {
        let s = default_sweep_spec(0);
        Self { n: s.n, directions: s.directions, probes: s.probes, distance_samples: s.distance_samples, fd_step: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub mode: u32,
    pub amplitudes: Vec<f64>,
    pub x0: [f64; 2],
    pub s_tilde: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let s = default_sweep_spec(0);
        Self { mode: s.mode, amplitudes: s.amplitudes, x0: s.x0, s_tilde: s.s_tilde }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub random_draws: u64,
    pub korn_draws: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { random_draws: 50, korn_draws: 100 }
    }
}

/// Invalid configuration, reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        let field = match &e {
            Error::InvalidParameter { name, .. } => name.to_string(),
            Error::InvalidAprioriData { .. } => "geometry.regularity.H0".to_string(),
            Error::InvalidGeometry(_) => "geometry".to_string(),
            Error::Undersampled { .. } => "discretization".to_string(),
            _ => String::new(),
        };
        Self { field, message: e.to_string() }
    }
}

impl RunConfig {
    /// Parses a config document. A file written by this program is accepted
    /// too: its `# config: ` line holds the configuration.
    pub fn parse_document(text: &str) -> std::result::Result<Value, ConfigError> {
        let body = text.lines().find_map(|l| l.strip_prefix(CONFIG_PREFIX)).map(str::to_string).unwrap_or_else(|| text.to_string());
        serde_json::from_str(&body).map_err(|e| ConfigError::new("", format!("config is not valid JSON: {e}")))
    }

    /// Builds the config from an optional document, `--set path=value`
    /// overrides and the seed variable.
    pub fn load(doc: Option<Value>, sets: &[String], seed_env: Option<String>) -> std::result::Result<Self, ConfigError> {
        let mut v = doc.unwrap_or_else(|| Value::Object(Default::default()));
        if !v.is_object() {
            return Err(ConfigError::new("", "config must be a JSON object"));
        }
        for s in sets {
            let (path, raw) = s.split_once('=').ok_or_else(|| ConfigError::new(s.clone(), "expected --set path=value"))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut v, path, value)?;
        }
        if let Some(seed) = seed_env {
            let seed: u64 =
                seed.trim().parse().map_err(|_| ConfigError::new("seed", format!("{SEED_ENV}={seed} is not an unsigned integer")))?;
            set_path(&mut v, "seed", Value::from(seed))?;
        }
        let mut merged = serde_json::to_value(RunConfig::default()).expect("config serializes");
        merge(&mut merged, v);
        let v = merged;
        let cfg: RunConfig = serde_json::from_value(v).map_err(|e| ConfigError::new("", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        self.incident.wave()?;
        self.geometry.regularity.validate(&self.medium, 2)?;
        let d = &self.discretization;
        if d.n < MIN_NODES || d.n % 2 == 1 {
            return Err(ConfigError::new("discretization.n", format!("must be even and at least {MIN_NODES}, got {}", d.n)));
        }
        if d.directions < MIN_DIRECTIONS {
            return Err(ConfigError::new("discretization.directions", format!("must be at least {MIN_DIRECTIONS}, got {}", d.directions)));
        }
        if d.probes == 0 {
            return Err(ConfigError::new("discretization.probes", "must be positive"));
        }
        if d.distance_samples < MIN_SAMPLES {
            return Err(ConfigError::new(
                "discretization.distance_samples",
                format!("must be at least {MIN_SAMPLES}, got {}", d.distance_samples),
            ));
        }
        if let Some(h) = d.fd_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::new("discretization.fd_step", format!("must be positive, got {h}")));
            }
        }
        self.sweep_spec().validate(&self.geometry.regularity, &self.medium).map_err(|e| {
            let mut c = ConfigError::from(e);
            c.field = format!("sweep.{}", c.field);
            c
        })?;
        Ok(())
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let family: CurveFamily = self.geometry.curve.into();
        SweepSpec {
            base: family,
            mode: self.sweep.mode,
            amplitudes: self.sweep.amplitudes.clone(),
            n: self.discretization.n,
            directions: self.discretization.directions,
            probes: self.discretization.probes,
            distance_samples: self.discretization.distance_samples,
            x0: self.sweep.x0,
            s_tilde: self.sweep.s_tilde,
            seed: self.seed,
        }
    }

    /// The line echoed at the top of every output file.
    pub fn header_line(&self) -> String {
        format!("config: {}", serde_json::to_string(self).expect("config serializes"))
    }
}

/// Overlays `top` on `base`. Objects merge key by key unless their
/// `family` tags differ, in which case `top` replaces `base`.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) if t.get("family").is_none_or(|f| b.get("family") == Some(f)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, t) => *b = t,
    }
}

fn set_path(root: &mut Value, path: &str, value: Value) -> std::result::Result<(), ConfigError> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        if p.is_empty() {
            return Err(ConfigError::new(path, "empty path segment"));
        }
        let obj = cur.as_object_mut().ok_or_else(|| ConfigError::new(path, "path goes through a non-object value"))?;
        if i + 1 == parts.len() {
            obj.insert(p.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(p.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}
