//! JSON run configuration shared by every subcommand.

use std::path::Path;

use ebclab::dtn::Height;
use ebclab::field::{ForcingPreset, InitialPreset};
use ebclab::fullsolver::{LayerConfig, TimeGrid};
use ebclab::harness::ExperimentConfig;
use ebclab::mesh::MeshSpec;
use ebclab::regime::{classify, classify_limits, ExtendedLimit, RegimeCell, ScalingLaw};
use ebclab::{EbcFamily, EffectiveConfig, SphereGeometry};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Layer conductivities, either as power laws in δ or as prescribed limits `(b, γ, β)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum LawSpec {
    Scaling(ScalingLaw),
    Limits { b: ExtendedLimit, gamma: ExtendedLimit, beta: ExtendedLimit },
}

impl LawSpec {
    pub fn cell(&self) -> RegimeCell {
        match self {
            LawSpec::Scaling(law) => classify(law),
            LawSpec::Limits { b, gamma, beta } => classify_limits(*b, *gamma, *beta),
        }
    }

    pub fn scaling(&self) -> Option<&ScalingLaw> {
        match self {
            LawSpec::Scaling(law) => Some(law),
            LawSpec::Limits { .. } => None,
        }
    }
}

/// Layer thickness for `solve-full`; `sigma`/`mu` default to the scaling law at `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FullSection {
    pub delta: f64,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
}

/// Either a number or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HeightInput {
    Value(f64),
    Text(String),
}

impl HeightInput {
    pub fn resolve(&self) -> Result<Height, CliError> {
        Ok(match self {
            HeightInput::Value(h) => Height::finite(*h)?,
            HeightInput::Text(s) => s.parse()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtnSection {
    pub lmax: u32,
    pub height: HeightInput,
    #[serde(default = "one")]
    pub r1: f64,
}

fn one() -> f64 {
    1.0
}

fn default_geom() -> SphereGeometry {
    SphereGeometry { r1: 1.0, r2: 2.0 }
}

fn default_lmax() -> u32 {
    4
}

fn default_initial() -> InitialPreset {
    InitialPreset::MultiMode { amplitude: 1.0 }
}

fn default_forcing() -> ForcingPreset {
    ForcingPreset::Zero {}
}

fn default_time() -> TimeGrid {
    TimeGrid { t_final: 0.1, dt: 1e-3, theta: 1.0, snapshot_stride: 10 }
}

/// Top-level configuration document. Sections a subcommand does not use are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub law: Option<LawSpec>,
    #[serde(default = "default_geom")]
    pub geom: SphereGeometry,
    #[serde(default = "one")]
    pub k1: f64,
    #[serde(default = "one")]
    pub k2: f64,
    #[serde(default = "default_lmax")]
    pub lmax: u32,
    #[serde(default = "default_initial")]
    pub initial: InitialPreset,
    #[serde(default = "default_forcing")]
    pub forcing: ForcingPreset,
    #[serde(default = "default_time")]
    pub time: TimeGrid,
    #[serde(default)]
    pub mesh: MeshSpec,
    /// Layer thicknesses for `converge`.
    #[serde(default)]
    pub deltas: Option<Vec<f64>>,
    #[serde(default)]
    pub full: Option<FullSection>,
    /// Effective family for `solve-ebc`; derived from `law` when absent.
    #[serde(default)]
    pub ebc: Option<EbcFamily>,
    #[serde(default)]
    pub dtn: Option<DtnSection>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        SphereGeometry::new(self.geom.r1, self.geom.r2)?;
        self.time.validate()?;
        if let Some(LawSpec::Scaling(law)) = &self.law {
            law.validate()?;
        }
        if !(self.k1 > 0.0 && self.k2 > 0.0) {
            return Err(CliError::Config("k1 and k2 must be positive".into()));
        }
        if let Some(f) = &self.ebc {
            f.validate()?;
        }
        Ok(())
    }

    pub fn law(&self) -> Result<&LawSpec, CliError> {
        self.law.as_ref().ok_or_else(|| CliError::Config("missing `law` section".into()))
    }

    pub fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let law = self.law()?;
        let scaling = match law.scaling() {
            Some(s) => *s,
            None => {
                let cell = law.cell();
                if !cell.feasible {
                    return Err(CliError::Infeasible(cell.reason.unwrap_or_default()));
                }
                return Err(CliError::Config("`converge` needs a `scaling` law; explicit limits cannot be solved".into()));
            }
        };
        let deltas = self.deltas.clone().ok_or_else(|| CliError::Config("missing `deltas`".into()))?;
        let cfg = ExperimentConfig {
            law: scaling,
            deltas,
            geom: self.geom,
            k1: self.k1,
            k2: self.k2,
            lmax: self.lmax,
            initial: self.initial.clone(),
            forcing: self.forcing.clone(),
            time: self.time,
            mesh: self.mesh,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn layer(&self) -> Result<LayerConfig, CliError> {
        let full = self.full.as_ref().ok_or_else(|| CliError::Config("missing `full` section".into()))?;
        let law = self.law.as_ref().and_then(LawSpec::scaling);
        let pick = |v: Option<f64>, name: &str, f: &dyn Fn(&ScalingLaw) -> f64| {
            v.or_else(|| law.map(f))
                .ok_or_else(|| CliError::Config(format!("`full.{name}` not given and no scaling law to derive it")))
        };
        let sigma = pick(full.sigma, "sigma", &|l| l.sigma(full.delta))?;
        let mu = pick(full.mu, "mu", &|l| l.mu(full.delta))?;
        Ok(LayerConfig::new(self.geom, full.delta, sigma, mu, self.k1, self.k2)?)
    }

    pub fn effective(&self) -> Result<(EbcFamily, EffectiveConfig), CliError> {
        let family = match self.ebc {
            Some(f) => f,
            None => {
                let cell = self.law()?.cell();
                match cell.family {
                    Some(f) => f,
                    None => return Err(CliError::Infeasible(cell.reason.unwrap_or_default())),
                }
            }
        };
        Ok((family, EffectiveConfig::new(self.geom, self.k1, self.k2)?))
    }
}
