//! Run configuration: one TOML file describing the base model, the
//! perturbation targets, the weight profile, the output functional and the
//! norms to report.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use modelrisk_core::densities::{FamilyParams, GridSpec, OutputFunctional};
use modelrisk_core::kernel::{make_profile, ProfileKind};
use modelrisk_core::neighbourhood::DEFAULT_T_SAMPLES;
use modelrisk_core::risk::{Deviation, Norm, RiskRequest};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub base: FamilyParams,
    #[serde(default)]
    pub targets: Vec<FamilyParams>,
    pub kernel: ProfileKind,
    pub functional: OutputFunctional,
    pub norms: Vec<NormName>,
    #[serde(default)]
    pub sobolev: Option<SobolevSpec>,
    #[serde(default)]
    pub deviation: Deviation,
    #[serde(default)]
    pub grid: GridSettings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormName {
    L1,
    L2,
    Linf,
    Sobolev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevSpec {
    pub s: u32,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub span: f64,
    pub points: usize,
    pub t_samples: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        let g = GridSpec::default();
        Self {
            span: g.span,
            points: g.points,
            t_samples: DEFAULT_T_SAMPLES,
        }
    }
}

impl GridSettings {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            span: self.span,
            points: self.points,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub report: String,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("modelrisk-out"),
            report: "report.json".into(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn norms(&self) -> Result<Vec<Norm>, CliError> {
        self.norms
            .iter()
            .map(|n| match n {
                NormName::L1 => Ok(Norm::L1),
                NormName::L2 => Ok(Norm::L2),
                NormName::Linf => Ok(Norm::Linf),
                NormName::Sobolev => self
                    .sobolev
                    .map(|SobolevSpec { s, p }| Norm::Sobolev { s, p })
                    .ok_or_else(|| {
                        CliError::Config("norm \"sobolev\" needs a [sobolev] table".into())
                    }),
            })
            .collect()
    }

    pub fn request(&self) -> Result<RiskRequest, CliError> {
        Ok(RiskRequest {
            functional: self.functional.clone(),
            norms: self.norms()?,
            deviation: self.deviation,
        })
    }

    /// Schema and per-module invariants; nothing is computed on grids here.
    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |e: modelrisk_core::Error| CliError::Config(e.to_string());
        if self.targets.is_empty() {
            return Err(CliError::Config(
                "at least one target model is required".into(),
            ));
        }
        self.base.validate().map_err(invalid)?;
        for t in &self.targets {
            t.validate().map_err(invalid)?;
        }
        self.grid.spec().validate().map_err(invalid)?;
        if self.grid.t_samples < 2 {
            return Err(CliError::Config(format!(
                "t_samples must be at least 2, got {}",
                self.grid.t_samples
            )));
        }
        make_profile(self.kernel, self.targets.len()).map_err(invalid)?;
        let request = self.request()?;
        request.validate().map_err(invalid)?;
        for norm in &request.norms {
            if let Norm::Sobolev { s, .. } = norm {
                let needed = 2 * *s as usize + 3;
                if self.grid.t_samples < needed {
                    return Err(CliError::Config(format!(
                        "Sobolev order {s} needs t_samples >= {needed}"
                    )));
                }
            }
        }
        if self.output.report.is_empty() {
            return Err(CliError::Config("output.report must name a file".into()));
        }
        Ok(())
    }
}
