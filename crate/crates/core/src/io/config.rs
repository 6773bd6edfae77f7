//! TOML run configuration.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::AnalysisOptions;
use crate::dynamics::{IntegratorSettings, ToyModelSpec, VortexConfiguration};
use crate::geometry::{ConformalMap, DomainKind, DomainModel, Point2, DEFAULT_BAND};
use crate::scenarios::{Oracle, Scenario, ScenarioSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    /// Malformed document, wrong type, missing or unknown key.
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    /// Well-formed document describing an invalid run.
    #[error("{0}")]
    Semantic(String),
}

impl ConfigError {
    fn schema(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Schema {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainName {
    Plane,
    HalfPlane,
    UnitDisk,
    ConformalDisk,
}

/// `[domain]` table. `coefficients` are the Taylor coefficients `[re, im]`
/// of the conformal map and are only accepted for `conformal-disk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_max_iter: Option<usize>,
}

impl DomainSpec {
    pub fn new(kind: DomainName) -> Self {
        Self {
            kind,
            band: None,
            coefficients: None,
            newton_tol: None,
            newton_max_iter: None,
        }
    }

    pub fn build(&self) -> Result<DomainModel, ConfigError> {
        let geometry = |e: crate::geometry::GeometryError| ConfigError::Semantic(format!("domain: {e}"));
        let conformal_only = self.coefficients.is_some() || self.newton_tol.is_some() || self.newton_max_iter.is_some();
        if conformal_only && self.kind != DomainName::ConformalDisk {
            return Err(ConfigError::Semantic(
                "domain: coefficients and Newton settings apply only to conformal-disk".into(),
            ));
        }
        let domain = match self.kind {
            DomainName::Plane => {
                if self.band.is_some() {
                    return Err(ConfigError::Semantic("domain: the plane has no boundary band".into()));
                }
                return Ok(DomainModel::plane());
            }
            DomainName::HalfPlane => DomainModel::half_plane(),
            DomainName::UnitDisk => DomainModel::unit_disk(),
            DomainName::ConformalDisk => {
                let coefficients = self
                    .coefficients
                    .as_ref()
                    .ok_or_else(|| ConfigError::schema("domain.coefficients", "required for conformal-disk"))?
                    .iter()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                let map = match (self.newton_tol, self.newton_max_iter) {
                    (None, None) => ConformalMap::new(coefficients),
                    (tol, iter) => ConformalMap::with_newton(coefficients, tol.unwrap_or(1e-13), iter.unwrap_or(50)),
                }
                .map_err(geometry)?;
                DomainModel::conformal(map).map_err(geometry)?
            }
        };
        match self.band {
            Some(band) => domain.with_band(band).map_err(geometry),
            None => Ok(domain),
        }
    }

    /// Description of an existing domain; the band is recorded when it differs
    /// from the default.
    pub fn describe(domain: &DomainModel) -> Self {
        let (kind, default_band) = match domain.kind() {
            DomainKind::Plane => return Self::new(DomainName::Plane),
            DomainKind::HalfPlane => (DomainName::HalfPlane, DEFAULT_BAND),
            DomainKind::UnitDisk => (DomainName::UnitDisk, DEFAULT_BAND),
            DomainKind::ConformalDisk(map) => (DomainName::ConformalDisk, map.default_band()),
        };
        let mut spec = Self::new(kind);
        if domain.band() != default_band {
            spec.band = Some(domain.band());
        }
        if let DomainKind::ConformalDisk(map) = domain.kind() {
            spec.coefficients = Some(map.coefficients().iter().map(|c| [c.re, c.im]).collect());
            spec.newton_tol = Some(map.newton_tol());
            spec.newton_max_iter = Some(map.newton_max_iter());
        }
        spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    pub position: Point2,
    pub intensity: f64,
}

/// `[output]` table; file names are relative to `dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub trajectory: String,
    pub diagnostics: String,
    pub metadata: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            trajectory: "trajectory.csv".into(),
            diagnostics: "diagnostics.csv".into(),
            metadata: "metadata.json".into(),
        }
    }
}

/// Complete description of one run.
///
/// Either `vortices` or `toy` is given. `name`, `description` and `oracle`
/// are set for shipped scenarios; a config with an oracle gets a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vortices: Vec<VortexSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToyModelSpec>,
    #[serde(default)]
    pub integrator: IntegratorSettings,
    #[serde(default)]
    pub diagnostics: AnalysisOptions,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Oracle>,
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = toml::Deserializer::new(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().message().trim().to_string();
        ConfigError::Schema { path, message }
    })?;
    config.validate()?;
    Ok(config)
}

/// TOML text that [`parse_config`] maps back to an equal config.
pub fn serialize_config(config: &RunConfig) -> Result<String, ConfigError> {
    toml::to_string(config).map_err(|e| ConfigError::schema(".", e.to_string()))
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        match (&self.toy, self.vortices.is_empty()) {
            (None, true) => return Err(ConfigError::schema("vortices", "expected at least one vortex")),
            (Some(_), false) => {
                return Err(ConfigError::Semantic(
                    "give either [[vortices]] or [toy], not both".into(),
                ))
            }
            _ => {}
        }
        let domain = self.domain.build()?;
        let semantic = |e: crate::dynamics::DynamicsError| ConfigError::Semantic(e.to_string());
        if let Some(toy) = &self.toy {
            if domain.kind() != &DomainKind::HalfPlane {
                return Err(ConfigError::Semantic("the toy model lives in the half-plane".into()));
            }
            toy.validate().map_err(semantic)?;
        } else {
            self.configuration().map_err(semantic)?.validate_for(&domain).map_err(semantic)?;
        }
        self.integrator.validate().map_err(semantic)?;
        let d = &self.diagnostics;
        if !(d.eta > 0.0) || d.window.is_some_and(|w| !(w >= 0.0)) || !d.ratio_t1.is_finite() {
            return Err(ConfigError::Semantic(
                "diagnostics: eta must be positive, window nonnegative and ratio_t1 finite".into(),
            ));
        }
        Ok(())
    }

    pub fn configuration(&self) -> Result<VortexConfiguration, crate::dynamics::DynamicsError> {
        VortexConfiguration::new(
            self.vortices.iter().map(|v| v.position).collect(),
            self.vortices.iter().map(|v| v.intensity).collect(),
        )
    }

    pub fn from_scenario(scenario: &Scenario) -> Self {
        let (vortices, toy) = match &scenario.system {
            ScenarioSystem::Vortices(c) => (
                c.positions
                    .iter()
                    .zip(&c.intensities)
                    .map(|(&position, &intensity)| VortexSpec { position, intensity })
                    .collect(),
                None,
            ),
            ScenarioSystem::Toy(spec) => (Vec::new(), Some(spec.clone())),
        };
        Self {
            name: Some(scenario.name.clone()),
            description: Some(scenario.description.clone()),
            domain: DomainSpec::describe(&scenario.domain),
            vortices,
            toy,
            integrator: scenario.settings.clone(),
            diagnostics: scenario.analysis.clone(),
            output: OutputSpec::default(),
            oracle: Some(scenario.oracle.clone()),
        }
    }

    /// The scenario this config describes; configs without an oracle get
    /// [`Oracle::None`].
    pub fn to_scenario(&self) -> Result<Scenario, ConfigError> {
        self.validate()?;
        let system = match &self.toy {
            Some(spec) => ScenarioSystem::Toy(spec.clone()),
            None => ScenarioSystem::Vortices(
                self.configuration()
                    .map_err(|e| ConfigError::Semantic(e.to_string()))?,
            ),
        };
        Ok(Scenario {
            name: self.name.clone().unwrap_or_default(),
            description: self.description.clone().unwrap_or_default(),
            domain: self.domain.build()?,
            system,
            settings: self.integrator.clone(),
            analysis: self.diagnostics.clone(),
            oracle: self.oracle.clone().unwrap_or(Oracle::None),
        })
    }
}
