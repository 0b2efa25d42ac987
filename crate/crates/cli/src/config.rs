//! Run-configuration schema: versioned TOML, strictly validated before any
//! computation. Unknown keys are rejected so typos fail loudly, and every
//! Monte Carlo task must carry an explicit seed — nothing is ever seeded
//! from the clock.

use fmt_core::fmt_model::FreeEnergyModel;
use fmt_core::geometry::{io::read_mesh, ConvexBody};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::CliError;

/// Schema revision understood by this binary.
pub const SCHEMA_VERSION: u32 = 1;

/// The task selector; mirrored by the CLI positional argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    /// Minkowski measures of each configured body.
    Measures,
    /// Two- and three-body curvature-identity battery on random data.
    WeightsCheck,
    /// Analytic and Monte Carlo excluded volumes for every body pair.
    ExcludedVolume,
    /// Second and third virial coefficients per body (analytic, MC, stack).
    Virial,
    /// Bulk equation-of-state sweep over packing fractions.
    Eos,
    /// Planar hard-wall density profile.
    Profile,
    /// Cross-module identity suite with pinned tolerances.
    IdentitySuite,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TaskKind::Measures => "measures",
            TaskKind::WeightsCheck => "weights-check",
            TaskKind::ExcludedVolume => "excluded-volume",
            TaskKind::Virial => "virial",
            TaskKind::Eos => "eos",
            TaskKind::Profile => "profile",
            TaskKind::IdentitySuite => "identity-suite",
        };
        f.write_str(name)
    }
}

/// Body declaration. Mesh paths are resolved relative to the config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodyConfig {
    Sphere { radius: f64 },
    Spheroid { a: f64, c: f64 },
    Mesh { path: String },
}

/// Free-energy model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Rosenfeld,
    Tarazona,
}

impl ModelKind {
    pub fn to_model(self) -> FreeEnergyModel {
        match self {
            ModelKind::Rosenfeld => FreeEnergyModel::RosenfeldOriginal,
            ModelKind::Tarazona => FreeEnergyModel::TarazonaTensor,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
}

/// Monte Carlo controls; the seed is mandatory by schema.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub n_samples: u64,
    pub seed: u64,
}

/// Planar grid parameters (profile task).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub dz: f64,
    #[serde(default)]
    pub origin: f64,
}

/// Thermodynamic state (profile task).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    /// Packing fraction η = ρ_b·V.
    pub eta: f64,
}

/// Picard solver overrides (profile task; defaults match the library).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub mixing: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

/// Equation-of-state sweep (eos task).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EosSection {
    pub eta_values: Vec<f64>,
}

/// Top-level run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: TaskKind,
    #[serde(default)]
    pub bodies: Vec<BodyConfig>,
    pub model: Option<ModelSection>,
    pub mc: Option<McSection>,
    pub grid: Option<GridSection>,
    pub state: Option<StateSection>,
    pub solver: Option<SolverSection>,
    pub eos: Option<EosSection>,
}

impl RunConfig {
    /// Parse and schema-validate a config document.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    /// Task-level requirements beyond the serde schema: which sections must
    /// be present for the requested task.
    pub fn validate_for_task(&self, requested: TaskKind) -> Result<(), CliError> {
        if self.task != requested {
            return Err(CliError::Config(format!(
                "config declares task '{}' but '{requested}' was requested",
                self.task
            )));
        }
        let need = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Config(format!(
                    "missing [{section}] section (required for task '{requested}')"
                )))
            }
        };
        match requested {
            TaskKind::Measures => need(!self.bodies.is_empty(), "bodies")?,
            TaskKind::WeightsCheck => need(self.mc.is_some(), "mc")?,
            TaskKind::ExcludedVolume => {
                need(!self.bodies.is_empty(), "bodies")?;
                need(self.mc.is_some(), "mc")?;
            }
            TaskKind::Virial => {
                need(!self.bodies.is_empty(), "bodies")?;
                need(self.model.is_some(), "model")?;
                need(self.mc.is_some(), "mc")?;
            }
            TaskKind::Eos => {
                need(!self.bodies.is_empty(), "bodies")?;
                need(self.model.is_some(), "model")?;
                need(self.eos.is_some(), "eos")?;
            }
            TaskKind::Profile => {
                need(!self.bodies.is_empty(), "bodies")?;
                need(self.model.is_some(), "model")?;
                need(self.grid.is_some(), "grid")?;
                need(self.state.is_some(), "state")?;
            }
            TaskKind::IdentitySuite => need(self.mc.is_some(), "mc")?,
        }
        Ok(())
    }

    /// Construct the configured bodies; mesh paths resolve against
    /// `base_dir` (the config file's directory).
    pub fn build_bodies(&self, base_dir: &Path) -> Result<Vec<ConvexBody>, CliError> {
        self.bodies
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                let body = match entry {
                    BodyConfig::Sphere { radius } => ConvexBody::sphere(*radius)
                        .map_err(|e| CliError::Validation(format!("bodies[{i}]: {e}")))?,
                    BodyConfig::Spheroid { a, c } => ConvexBody::spheroid(*a, *c)
                        .map_err(|e| CliError::Validation(format!("bodies[{i}]: {e}")))?,
                    BodyConfig::Mesh { path } => {
                        let full = base_dir.join(path);
                        let mesh = read_mesh(&full).map_err(|e| {
                            CliError::Validation(format!("bodies[{i}] ({}): {e}", full.display()))
                        })?;
                        ConvexBody::mesh(mesh)
                            .map_err(|e| CliError::Validation(format!("bodies[{i}]: {e}")))?
                    }
                };
                Ok(body)
            })
            .collect()
    }
}
