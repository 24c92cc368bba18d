//! Run configuration in TOML.

use gapfield::geom::{self, DiskPair};
use gapfield::{Complex, IncidentField, IncidentKind, Point2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub incident: IncidentConfig,
    #[serde(default)]
    pub discretization: DiscretizationConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub r1_coeff: f64,
    #[serde(default)]
    pub alpha1: f64,
    pub r2_coeff: f64,
    #[serde(default)]
    pub alpha2: f64,
    pub epsilon: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[default]
    ConstantBoundary,
    Transmission,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub omega: f64,
    /// Defaults to `omega`.
    #[serde(default)]
    pub permittivity_inclusion: Option<f64>,
    #[serde(default)]
    pub model: Model,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    #[serde(default = "default_kind")]
    pub kind: IncidentKind,
    #[serde(default = "default_direction")]
    pub direction: [f64; 2],
    /// `[re, im]` pairs.
    #[serde(default)]
    pub coefficients: Vec<[f64; 2]>,
}

fn default_kind() -> IncidentKind {
    IncidentKind::NormalizedGradientPair
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}

impl Default for IncidentConfig {
    fn default() -> Self {
        IncidentConfig { kind: default_kind(), direction: default_direction(), coefficients: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationConfig {
    #[serde(default = "default_n")]
    pub n_per_circle: usize,
    #[serde(default = "default_grading")]
    pub grading_exponent: f64,
}

fn default_n() -> usize {
    256
}

fn default_grading() -> f64 {
    3.0
}

impl Default for DiscretizationConfig {
    fn default() -> Self {
        DiscretizationConfig { n_per_circle: default_n(), grading_exponent: default_grading() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub epsilon_list: Vec<f64>,
    #[serde(default = "default_probe_density")]
    pub probe_density: usize,
}

fn default_probe_density() -> usize {
    64
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { epsilon_list: Vec::new(), probe_density: default_probe_density() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
}

fn default_dir() -> String {
    "gapfield-out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), formats: default_formats(), grid: None }
    }
}

/// Rectangular sample grid `[x1_min, x1_max] × [x2_min, x2_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
    #[serde(default = "default_grid_n")]
    pub n1: usize,
    #[serde(default = "default_grid_n")]
    pub n2: usize,
}

fn default_grid_n() -> usize {
    41
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    gapfield::layerpot::CALDERON_SEED
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { seed: default_seed() }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn positive(field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format_args!("must be positive and finite, got {v}")))
    }
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.geometry;
        positive("geometry.r1_coeff", g.r1_coeff)?;
        positive("geometry.r2_coeff", g.r2_coeff)?;
        positive("geometry.epsilon", g.epsilon)?;
        for (name, a) in [("geometry.alpha1", g.alpha1), ("geometry.alpha2", g.alpha2)] {
            if !a.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        positive("physics.omega", self.physics.omega)?;
        if let Some(p) = self.physics.permittivity_inclusion {
            positive("physics.permittivity_inclusion", p)?;
        }
        let [d1, d2] = self.incident.direction;
        let norm = (d1 * d1 + d2 * d2).sqrt();
        if !((norm - 1.0).abs() < 1e-12) {
            return Err(invalid("incident.direction", format_args!("must be a unit vector, |d| = {norm}")));
        }
        if self.incident.coefficients.len() > 3 {
            return Err(invalid("incident.coefficients", "at most three entries"));
        }
        if self.incident.coefficients.iter().flatten().any(|v| !v.is_finite()) {
            return Err(invalid("incident.coefficients", "must be finite"));
        }
        let n = self.discretization.n_per_circle;
        if n < 16 || n % 2 == 1 {
            return Err(invalid("discretization.n_per_circle", format_args!("must be even and at least 16, got {n}")));
        }
        if !(self.discretization.grading_exponent >= 1.0 && self.discretization.grading_exponent.is_finite()) {
            return Err(invalid("discretization.grading_exponent", "must be at least 1"));
        }
        for &e in &self.sweep.epsilon_list {
            positive("sweep.epsilon_list", e)?;
        }
        if self.sweep.probe_density < 16 {
            return Err(invalid("sweep.probe_density", "must be at least 16"));
        }
        if let Some(grid) = &self.output.grid {
            for (name, [lo, hi]) in [("output.grid.x1", grid.x1), ("output.grid.x2", grid.x2)] {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid(name, "needs finite bounds with min <= max"));
                }
            }
            if grid.n1 == 0 || grid.n2 == 0 {
                return Err(invalid("output.grid", "needs at least one point per axis"));
            }
        }
        self.disk_pair()?;
        Ok(())
    }

    pub fn permittivity_inclusion(&self) -> f64 {
        self.physics.permittivity_inclusion.unwrap_or(self.physics.omega)
    }

    pub fn disk_pair(&self) -> Result<DiskPair, CliError> {
        let g = &self.geometry;
        geom::make_config(
            g.r1_coeff,
            g.alpha1,
            g.r2_coeff,
            g.alpha2,
            g.epsilon,
            self.physics.omega,
            self.permittivity_inclusion(),
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn incident(&self) -> IncidentField {
        let [d1, d2] = self.incident.direction;
        IncidentField {
            kind: self.incident.kind,
            direction: Point2::new(d1, d2),
            coefficients: self.incident.coefficients.iter().map(|[re, im]| Complex::new(*re, *im)).collect(),
        }
    }

    /// Non-fatal findings about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Ok(cfg) = self.disk_pair() {
            if !cfg.is_quasistatic() {
                out.push(format!(
                    "quasi-static parameter omega * epsilon^alpha_- = {:.3e} exceeds {}",
                    cfg.quasistatic_parameter(),
                    geom::QUASISTATIC_WARN
                ));
            }
        }
        if self.incident.kind == IncidentKind::CustomCombination
            && self.incident.coefficients.first().is_some_and(|c| c[0] != 0.0 || c[1] != 0.0)
        {
            out.push("a constant incident term solves the Helmholtz equation only at omega = 0".into());
        }
        out
    }

    /// SHA-256 of the canonical JSON form, without the output directory.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("configuration serializes");
        if let Some(out) = value.get_mut("output").and_then(|o| o.as_object_mut()) {
            out.remove("dir");
        }
        let text = serde_json::to_string(&value).expect("configuration serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
