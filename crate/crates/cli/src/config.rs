//! Experiment files.
//!
//! ```toml
//! [dataset]
//! source = "microstrip"      # microstrip | rcs | synthetic | csv
//! count = 6000
//! seed = 1
//! split_seed = 2
//!
//! [model]
//! kind = "plrnet"
//! rank = 4
//! embed = { hidden = [16, 16], omega0 = 1.0 }
//! predictor = { hidden = [32, 32], omega0 = 1.0 }
//!
//! [train]
//! learning_rate = 1e-3
//! max_epochs = 1000
//!
//! [output]
//! dir = "runs/microstrip/plrnet"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use plrnet_core::datagen::synthetic::{SyntheticKind, DEFAULT_SCALE};
use plrnet_core::datagen::{Sampling, Variable};
use plrnet_core::{Architecture, EmbedArch, ModelKind, ModelSpec, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Microstrip,
    Rcs,
    Synthetic,
    Csv,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Microstrip => "microstrip",
            Source::Rcs => "rcs",
            Source::Synthetic => "synthetic",
            Source::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub kind: SyntheticKind,
    pub inputs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    /// Seed of the frozen generator (the sample seed is `dataset.seed`).
    pub seed: u64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    DEFAULT_SCALE
}

impl SyntheticConfig {
    pub fn rank_vector(&self) -> Result<Vec<usize>> {
        match (&self.rank, &self.ranks) {
            (Some(r), None) => Ok(plrnet_core::datagen::synthetic::uniform_ranks(self.kind, self.inputs, *r)),
            (None, Some(v)) => Ok(v.clone()),
            _ => Err(CliError::Config("[dataset.synthetic] needs exactly one of `rank` or `ranks`".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: Source,
    /// CSV file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub split_seed: u64,
    /// Replaces the generator's default box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<Variable>>,
    /// Grid levels per variable; uniform sampling when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        let is_csv = self.source == Source::Csv;
        if is_csv != self.path.is_some() {
            return Err(CliError::Config("`path` is required for source = \"csv\" and not allowed otherwise".into()));
        }
        if is_csv && (self.count.is_some() || self.variables.is_some() || self.grid.is_some()) {
            return Err(CliError::Config("csv datasets take no `count`, `variables` or `grid`".into()));
        }
        if (self.source == Source::Synthetic) != self.synthetic.is_some() {
            return Err(CliError::Config(
                "[dataset.synthetic] is required for source = \"synthetic\" and not allowed otherwise".into(),
            ));
        }
        if self.count == Some(0) {
            return Err(CliError::Usage("dataset count must be at least 1".into()));
        }
        if let Some(levels) = &self.grid {
            if levels.contains(&0) {
                return Err(CliError::Config(format!("grid levels must be positive: {levels:?}")));
            }
        }
        Ok(())
    }

    pub fn sampling(&self) -> Sampling {
        match &self.grid {
            Some(levels) => Sampling::Grid { levels: levels.clone() },
            None => Sampling::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Same width for every coordinate (LRTFR, PLRNet) or every bond (TT, TR).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    /// All `N + 1` reshape ranks of a train or ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bonds: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embed: Option<EmbedArch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predictor: Option<EmbedArch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    /// Defaults to `train.seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_seed: Option<u64>,
}

impl ModelConfig {
    fn reject(&self, fields: &[(&str, bool)]) -> Result<()> {
        for (name, present) in fields {
            if *present {
                return Err(CliError::Config(format!("`model.{name}` does not apply to kind {}", self.kind)));
            }
        }
        Ok(())
    }

    fn widths(&self, n: usize) -> Result<Vec<usize>> {
        match (&self.rank, &self.ranks) {
            (Some(r), None) => Ok(vec![*r; n]),
            (None, Some(v)) => Ok(v.clone()),
            _ => Err(CliError::Config(format!("{} needs exactly one of `rank` or `ranks`", self.kind))),
        }
    }

    fn bond_vector(&self, n: usize) -> Result<Vec<usize>> {
        match (&self.rank, &self.bonds) {
            (Some(r), None) if self.kind == ModelKind::Tt => {
                let mut b = vec![*r; n + 1];
                b[0] = 1;
                b[n] = 1;
                Ok(b)
            }
            (Some(r), None) => Ok(vec![*r; n + 1]),
            (None, Some(v)) => Ok(v.clone()),
            _ => Err(CliError::Config(format!("{} needs exactly one of `rank` or `bonds`", self.kind))),
        }
    }

    fn embed_arch(&self) -> Result<EmbedArch> {
        self.embed
            .clone()
            .ok_or_else(|| CliError::Config(format!("{} needs `model.embed`", self.kind)))
    }

    /// Model shape over `n` inputs.
    pub fn spec(&self, n: usize) -> Result<ModelSpec> {
        let architecture = match self.kind {
            ModelKind::Mlp => {
                self.reject(&[
                    ("rank", self.rank.is_some()),
                    ("ranks", self.ranks.is_some()),
                    ("bonds", self.bonds.is_some()),
                    ("embed", self.embed.is_some()),
                    ("predictor", self.predictor.is_some()),
                ])?;
                Architecture::Mlp {
                    hidden: self.hidden.clone().ok_or_else(|| CliError::Config("mlp needs `model.hidden`".into()))?,
                    omega0: self.omega0.unwrap_or(plrnet_core::siren::DEFAULT_OMEGA0),
                }
            }
            ModelKind::Lrtfr => {
                self.reject(&[
                    ("bonds", self.bonds.is_some()),
                    ("predictor", self.predictor.is_some()),
                    ("hidden", self.hidden.is_some()),
                    ("omega0", self.omega0.is_some()),
                ])?;
                Architecture::Lrtfr {
                    ranks: self.widths(n)?,
                    embed: self.embed_arch()?,
                }
            }
            ModelKind::Tt | ModelKind::Tr => {
                self.reject(&[
                    ("ranks", self.ranks.is_some()),
                    ("predictor", self.predictor.is_some()),
                    ("hidden", self.hidden.is_some()),
                    ("omega0", self.omega0.is_some()),
                ])?;
                let bonds = self.bond_vector(n)?;
                let embed = self.embed_arch()?;
                if self.kind == ModelKind::Tt {
                    Architecture::Tt { bonds, embed }
                } else {
                    Architecture::Tr { bonds, embed }
                }
            }
            ModelKind::Plrnet => {
                self.reject(&[
                    ("bonds", self.bonds.is_some()),
                    ("hidden", self.hidden.is_some()),
                    ("omega0", self.omega0.is_some()),
                ])?;
                Architecture::Plrnet {
                    ranks: self.widths(n)?,
                    embed: self.embed_arch()?,
                    predictor: self
                        .predictor
                        .clone()
                        .ok_or_else(|| CliError::Config("plrnet needs `model.predictor`".into()))?,
                }
            }
        };
        let spec = ModelSpec::new(n, architecture);
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Relative to the working directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Row name in comparison tables; defaults to the model kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Relative-error denominator floor, in target units.
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { floor: DEFAULT_FLOOR }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        self.train.validate()?;
        if !(self.eval.floor > 0.0 && self.eval.floor.is_finite()) {
            return Err(CliError::Config(format!("eval.floor must be positive, got {}", self.eval.floor)));
        }
        Ok(())
    }

    pub fn init_seed(&self) -> u64 {
        self.model.init_seed.unwrap_or(self.train.seed)
    }

    pub fn label(&self) -> String {
        self.output.label.clone().unwrap_or_else(|| self.model.kind.name().to_string())
    }

    /// Replaces the training and initialisation seeds.
    pub fn override_train_seed(&mut self, seed: u64) {
        self.train.seed = seed;
        self.model.init_seed = Some(seed);
    }

    /// SHA-256 over the settings that affect results (the output location
    /// is excluded).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output.dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// A parsed config plus the directory relative paths resolve against.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
    pub path: PathBuf,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config = ExperimentConfig::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        Ok(Self {
            config,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            path: path.to_path_buf(),
        })
    }

    pub fn from_config(config: ExperimentConfig, base_dir: &Path) -> Self {
        Self {
            config,
            base_dir: base_dir.to_path_buf(),
            path: PathBuf::new(),
        }
    }

    pub fn csv_path(&self) -> Option<PathBuf> {
        self.config.dataset.path.as_ref().map(|p| self.base_dir.join(p))
    }

    /// `--out` if given, else `output.dir`.
    pub fn out_dir(&self, cli_out: Option<&Path>) -> Result<PathBuf> {
        cli_out
            .map(Path::to_path_buf)
            .or_else(|| self.config.output.dir.clone())
            .ok_or_else(|| CliError::Usage("no output directory: pass --out or set output.dir".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLRNET: &str = r#"
        [dataset]
        source = "microstrip"
        count = 100
        seed = 1

        [model]
        kind = "plrnet"
        rank = 4
        embed = { hidden = [16], omega0 = 1.0 }
        predictor = { hidden = [32], omega0 = 1 }

        [train]
        max_epochs = 5
    "#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::parse(PLRNET).unwrap();
        assert_eq!(c.train.learning_rate, TrainConfig::default().learning_rate);
        assert_eq!(c.train.max_epochs, 5);
        assert_eq!(c.eval.floor, DEFAULT_FLOOR);
        let spec = c.model.spec(6).unwrap();
        assert_eq!(spec.kind(), ModelKind::Plrnet);
        assert_eq!(c.label(), "PLRNet");
    }

    #[test]
    fn rejects_unknown_and_misplaced_fields() {
        let typo = PLRNET.replace("max_epochs", "max_epoch");
        assert!(matches!(ExperimentConfig::parse(&typo), Err(CliError::Config(_))));
        let c = ExperimentConfig::parse(&PLRNET.replace("rank = 4", "rank = 4\nbonds = [1, 2]")).unwrap();
        assert!(c.model.spec(6).is_err());
        let csv = PLRNET.replace("source = \"microstrip\"", "source = \"csv\"");
        assert!(ExperimentConfig::parse(&csv).is_err());
    }

    #[test]
    fn zero_count_is_a_usage_error() {
        let c = PLRNET.replace("count = 100", "count = 0");
        assert!(matches!(ExperimentConfig::parse(&c), Err(CliError::Usage(_))));
    }

    #[test]
    fn bond_shorthand() {
        let mut c = ExperimentConfig::parse(PLRNET).unwrap();
        c.model = ModelConfig {
            kind: ModelKind::Tt,
            rank: Some(3),
            ranks: None,
            bonds: None,
            embed: Some(EmbedArch::new(vec![4], 1.0)),
            predictor: None,
            hidden: None,
            omega0: None,
            init_seed: None,
        };
        let Architecture::Tt { bonds, .. } = c.model.spec(4).unwrap().architecture else { panic!() };
        assert_eq!(bonds, vec![1, 3, 3, 3, 1]);
        c.model.kind = ModelKind::Tr;
        let Architecture::Tr { bonds, .. } = c.model.spec(4).unwrap().architecture else { panic!() };
        assert_eq!(bonds, vec![3; 5]);
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::parse(PLRNET).unwrap();
        let mut b = a.clone();
        b.output.dir = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.override_train_seed(7);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(b.init_seed(), 7);
    }
}
