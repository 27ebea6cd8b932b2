//! Run configuration (TOML). Every section is optional and falls back to the
//! built-in defaults; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{EstimatorParams, TrainingSelection};
use crate::evaluation::{PipelineParams, StudyConfig};
use crate::simulator::{DatasetSpec, SimulationSetup};

pub const DEFAULT_SEED: u64 = 20_240_501;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub setup: SimulationSetup,
    pub dataset: DatasetSpec,
    pub pipeline: PipelineParams,
    pub estimator: EstimatorParams,
    pub training: TrainingSelection,
    pub study: StudyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            setup: SimulationSetup::default(),
            dataset: DatasetSpec::default(),
            pipeline: PipelineParams::default(),
            estimator: EstimatorParams::default(),
            training: TrainingSelection::default(),
            study: StudyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.setup.validate()?;
        Ok(cfg)
    }

    /// `"default"` selects the built-in configuration; anything else is a path.
    pub fn load(source: &str) -> Result<Self> {
        if source == "default" {
            return Ok(Self::default());
        }
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}
