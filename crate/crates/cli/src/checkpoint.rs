//! Best-model files: shape, standardization and flat parameters as JSON.

use std::fs;
use std::path::Path;

use plrnet_core::optim::Standardization;
use plrnet_core::{ModelSpec, SurrogateModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT: &str = "plrnet-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub label: String,
    pub input_names: Vec<String>,
    pub standardization: Standardization,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub spec: ModelSpec,
    pub params: Vec<f64>,
}

impl Checkpoint {
    pub fn new(
        model: &SurrogateModel,
        input_names: Vec<String>,
        standardization: Standardization,
        config_hash: &str,
        label: &str,
        epochs_run: usize,
        best_epoch: usize,
    ) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            config_hash: config_hash.into(),
            label: label.into(),
            input_names,
            standardization,
            epochs_run,
            best_epoch,
            spec: model.spec().clone(),
            params: model.params(),
        }
    }

    pub fn model(&self) -> Result<SurrogateModel> {
        let mut model = SurrogateModel::zeros(self.spec.clone())?;
        model.set_params(&self.params)?;
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::Data(format!("checkpoint: {e}")))?;
        if c.format != FORMAT || c.version != VERSION {
            return Err(CliError::Data(format!("unsupported checkpoint format {} v{}", c.format, c.version)));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }
}
