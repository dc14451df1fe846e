//! The four subcommands as library functions.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use plrnet_core::datagen::synthetic::{lowrank_spec, default_embed, SyntheticGenerator};
use plrnet_core::datagen::{microstrip, rcs, ParamBox, Sampling, Variable};
use plrnet_core::metrics::{evaluate, mre_maxre, ComparisonTable, FailedRun};
use plrnet_core::optim::{train, Evaluator};
use plrnet_core::{Dataset, EvalResult, RawData, SurrogateModel, TrainReport};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkpoint::Checkpoint;
use crate::config::{hex, ExperimentConfig, LoadedConfig, Source, SyntheticConfig};
use crate::csvio::{fmt_float, read_csv, write_csv};
use crate::error::{CliError, Result};

pub const DATASET_FILE: &str = "dataset.csv";
pub const META_FILE: &str = "dataset.meta.toml";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const REPORT_FILE: &str = "report.json";
pub const CURVE_FILE: &str = "curve.csv";
pub const EVAL_FILE: &str = "eval.json";
pub const TIMING_FILE: &str = "timing.txt";
pub const TABLE_FILE: &str = "comparison.txt";
pub const TABLE_CSV_FILE: &str = "comparison.csv";

const MICROSTRIP_NOTE: &str = "closed-form quasi-static lossless microstrip line terminated in a resistive load; \
     not a full-wave simulation";
const RCS_NOTE: &str = "substitute benchmark: circular PEC cylinder, TM plane wave, eigenfunction series; \
     stands in for an elliptic cylinder, and the incidence angle is dropped because a circle is symmetric";
const SYNTHETIC_NOTE: &str = "frozen random low-rank generator; targets are exact model outputs";

/// Sidecar describing where a dataset came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub config_hash: String,
    pub generator: String,
    pub rows: usize,
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_impedance_ohm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<Variable>,
}

/// Rows described by `[dataset]`, generated or read from disk.
pub fn build_dataset(cfg: &LoadedConfig) -> Result<(RawData, DatasetMeta)> {
    let d = &cfg.config.dataset;
    d.validate()?;
    let with_box = |default: ParamBox| -> Result<ParamBox> {
        let mut pbox = default;
        if let Some(vars) = &d.variables {
            if vars.len() != pbox.dim() {
                return Err(CliError::Config(format!(
                    "{} takes {} variables, config lists {}",
                    d.source.name(),
                    pbox.dim(),
                    vars.len()
                )));
            }
            pbox.variables = vars.clone();
        }
        pbox.sampling = d.sampling();
        pbox.validate()?;
        Ok(pbox)
    };
    let mut meta = DatasetMeta {
        config_hash: cfg.config.hash(),
        generator: d.source.name().into(),
        rows: 0,
        inputs: Vec::new(),
        count: None,
        seed: None,
        sampling: None,
        grid_levels: d.grid.clone(),
        reference_impedance_ohm: None,
        source_file: None,
        note: None,
        synthetic: None,
        variables: Vec::new(),
    };
    let (raw, pbox) = match d.source {
        Source::Microstrip => {
            let pbox = with_box(microstrip::default_box())?;
            let count = d.count.unwrap_or(microstrip::DEFAULT_COUNT);
            meta.reference_impedance_ohm = Some(microstrip::REFERENCE_IMPEDANCE);
            meta.note = Some(MICROSTRIP_NOTE.into());
            (microstrip::dataset(&pbox, count, d.seed)?, Some((pbox, count)))
        }
        Source::Rcs => {
            let pbox = with_box(rcs::default_box())?;
            let count = d.count.unwrap_or(rcs::DEFAULT_COUNT);
            meta.note = Some(RCS_NOTE.into());
            (rcs::dataset(&pbox, count, d.seed)?, Some((pbox, count)))
        }
        Source::Synthetic => {
            let s = d.synthetic.as_ref().expect("validated");
            let spec = lowrank_spec(s.kind, s.inputs, &s.rank_vector()?, default_embed())?;
            let generator = SyntheticGenerator::with_scale(spec, s.seed, s.scale)?;
            let pbox = with_box(generator.param_box())?;
            let count = d.count.ok_or_else(|| CliError::Config("synthetic datasets need `count`".into()))?;
            meta.synthetic = Some(s.clone());
            meta.note = Some(SYNTHETIC_NOTE.into());
            (generator.sample(&pbox, count, d.seed)?, Some((pbox, count)))
        }
        Source::Csv => {
            let path = cfg.csv_path().expect("validated");
            meta.source_file = Some(path.display().to_string());
            (read_csv(&path)?, None)
        }
    };
    if let Some((pbox, count)) = pbox {
        meta.count = Some(count);
        meta.seed = Some(d.seed);
        meta.sampling = Some(match pbox.sampling {
            Sampling::Uniform => "uniform".into(),
            Sampling::Grid { .. } => "grid".into(),
        });
        meta.variables = pbox.variables;
    }
    meta.rows = raw.len();
    meta.inputs = raw.names.clone();
    Ok((raw, meta))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_dataset(dir: &Path, raw: &RawData, meta: &DatasetMeta) -> Result<PathBuf> {
    let csv = dir.join(DATASET_FILE);
    write_csv(&csv, raw, &meta.config_hash)?;
    let toml = toml::to_string(meta).map_err(|e| CliError::Config(format!("metadata: {e}")))?;
    write(&dir.join(META_FILE), &toml)?;
    Ok(csv)
}

/// `generate`: writes the dataset and its metadata sidecar.
pub fn run_generate(cfg: &LoadedConfig, out: &Path) -> Result<(PathBuf, usize)> {
    if cfg.config.dataset.source == Source::Csv {
        return Err(CliError::Usage("generate needs a generator source, not a csv file".into()));
    }
    let (raw, meta) = build_dataset(cfg)?;
    create_dir(out)?;
    let path = write_dataset(out, &raw, &meta)?;
    Ok((path, raw.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub rows: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    pub split_seed: u64,
    pub clamped_inputs: Vec<usize>,
    pub target_clamped: bool,
}

/// Everything a training run recorded, apart from wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config_hash: String,
    pub label: String,
    /// `ok` or `failed`.
    pub status: String,
    pub error: Option<String>,
    pub config: ExperimentConfig,
    pub split: SplitSummary,
    pub init_seed: u64,
    pub param_count: usize,
    /// Standardized MSE of the retained checkpoint on the training rows.
    pub final_train_mse: Option<f64>,
    pub final_test_mse: Option<f64>,
    pub metrics: Option<EvalResult>,
    pub train: TrainReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFile {
    pub config_hash: String,
    pub checkpoint_config_hash: String,
    pub split: String,
    pub result: EvalResult,
}

impl EvalFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn curve_csv(report: &TrainReport, hash: &str) -> String {
    let mut out = format!("# config_hash = {hash}\nepoch,train_loss,test_loss\n");
    for (e, (tr, te)) in report.train_loss.iter().zip(&report.test_loss).enumerate() {
        out.push_str(&format!("{},{},{}\n", e + 1, fmt_float(*tr), fmt_float(*te)));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub dir: PathBuf,
    pub report: RunReport,
    pub wall_seconds: f64,
}

/// `train`: split, standardize, fit, and write every run artifact to `out`.
pub fn run_train(cfg: &LoadedConfig, out: &Path, evaluator: &dyn Evaluator, threads: usize) -> Result<TrainOutcome> {
    let config = &cfg.config;
    let hash = config.hash();
    let label = config.label();
    let (raw, meta) = build_dataset(cfg)?;
    let n = raw.n_inputs();
    let spec = config.model.spec(n)?;
    let data = Dataset::split_and_standardize(raw.clone(), config.dataset.split_seed)?;
    let model = SurrogateModel::init(spec, config.init_seed())?;

    create_dir(out)?;
    write_dataset(out, &raw, &meta)?;
    let stats = data.stats().clone();
    let split = SplitSummary {
        rows: data.len(),
        train_rows: data.train().len(),
        test_rows: data.test().len(),
        split_seed: config.dataset.split_seed,
        clamped_inputs: stats.clamped_inputs.clone(),
        target_clamped: stats.target_clamped,
    };
    let param_count = model.param_count();

    let start = Instant::now();
    let result = train(model, &data, &config.train, evaluator);
    let wall_seconds = start.elapsed().as_secs_f64();

    let (report, failure) = match result {
        Ok((best, train_report)) => {
            let final_train_mse = evaluator.loss(&best, &data, data.train())?;
            let final_test_mse = evaluator.loss(&best, &data, data.test())?;
            let mut metrics = evaluate(&best, &data, data.test(), config.eval.floor)?;
            metrics.label = label.clone();
            metrics.epochs_run = train_report.epochs_run;
            metrics.best_epoch = train_report.best_epoch;
            let checkpoint = Checkpoint::new(
                &best,
                raw.names.clone(),
                stats,
                &hash,
                &label,
                train_report.epochs_run,
                train_report.best_epoch,
            );
            checkpoint.save(&out.join(CHECKPOINT_FILE))?;
            let eval_file = EvalFile {
                config_hash: hash.clone(),
                checkpoint_config_hash: hash.clone(),
                split: "test".into(),
                result: metrics.clone(),
            };
            write(&out.join(EVAL_FILE), &to_json(&eval_file))?;
            let report = RunReport {
                config_hash: hash.clone(),
                label,
                status: "ok".into(),
                error: None,
                config: config.clone(),
                split,
                init_seed: config.init_seed(),
                param_count,
                final_train_mse: Some(final_train_mse),
                final_test_mse: Some(final_test_mse),
                metrics: Some(metrics),
                train: train_report,
            };
            (report, None)
        }
        Err(failure) => {
            let report = RunReport {
                config_hash: hash.clone(),
                label,
                status: "failed".into(),
                error: Some(failure.to_string()),
                config: config.clone(),
                split,
                init_seed: config.init_seed(),
                param_count,
                final_train_mse: None,
                final_test_mse: None,
                metrics: None,
                train: failure.report.clone(),
            };
            (report, Some(failure.error))
        }
    };
    write(&out.join(REPORT_FILE), &to_json(&report))?;
    write(&out.join(CURVE_FILE), &curve_csv(&report.train, &hash))?;
    write(
        &out.join(TIMING_FILE),
        &format!(
            "config_hash = {hash}\nlabel = {}\nwall_seconds = {wall_seconds:.3}\nepochs_run = {}\nthreads = {threads}\n",
            report.label, report.train.epochs_run
        ),
    )?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok(TrainOutcome {
        dir: out.to_path_buf(),
        report,
        wall_seconds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
    All,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::All => "all",
        }
    }
}

/// `eval`: scores a checkpoint on one split of a dataset, in original units.
///
/// The split is recomputed from `dataset.split_seed`; inputs and outputs go
/// through the checkpoint's own standardization.
pub fn run_eval(
    cfg: &LoadedConfig,
    checkpoint: &Path,
    data_csv: Option<&Path>,
    split: Split,
    out: &Path,
) -> Result<EvalFile> {
    let ck = Checkpoint::load(checkpoint)?;
    let model = ck.model()?;
    let raw = match data_csv {
        Some(p) => read_csv(p)?,
        None => build_dataset(cfg)?.0,
    };
    if raw.n_inputs() != model.input_dim() {
        return Err(CliError::Data(format!(
            "checkpoint expects {} inputs, dataset has {}",
            model.input_dim(),
            raw.n_inputs()
        )));
    }
    let data = Dataset::split_and_standardize(raw, cfg.config.dataset.split_seed)?;
    let rows: Vec<usize> = match split {
        Split::Train => data.train().to_vec(),
        Split::Test => data.test().to_vec(),
        Split::All => (0..data.len()).collect(),
    };
    let stats = &ck.standardization;
    let mut predictions = Vec::with_capacity(rows.len());
    for &r in &rows {
        let x = stats.standardize_input(data.raw().row(r));
        predictions.push(stats.destandardize_target(model.predict(&x)?));
    }
    let targets: Vec<f64> = rows.iter().map(|&r| data.target(r)).collect();
    let floor = cfg.config.eval.floor;
    let (test_mre, test_maxre) = mre_maxre(&predictions, &targets, floor)?;
    let result = EvalResult {
        model_kind: model.kind(),
        label: ck.label.clone(),
        test_mre,
        test_maxre,
        param_count: model.param_count(),
        epochs_run: ck.epochs_run,
        best_epoch: ck.best_epoch,
        floor,
        samples: rows.len(),
    };
    let file = EvalFile {
        config_hash: cfg.config.hash(),
        checkpoint_config_hash: ck.config_hash.clone(),
        split: split.name().into(),
        result,
    };
    create_dir(out)?;
    write(&out.join(EVAL_FILE), &to_json(&file))?;
    Ok(file)
}

fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '-' })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub table: ComparisonTable,
    pub hash: String,
    pub run_dirs: Vec<PathBuf>,
}

/// `sweep`: trains each config under `out/NN-label/` and writes the
/// comparison table. Runs that fail become `failed` rows.
pub fn run_sweep(paths: &[PathBuf], seed: Option<u64>, out: &Path, evaluator: &dyn Evaluator, threads: usize) -> Result<SweepOutcome> {
    if paths.is_empty() {
        return Err(CliError::Usage("sweep needs at least one --config".into()));
    }
    create_dir(out)?;
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    let mut hashes = Vec::new();
    let mut run_dirs = Vec::new();
    for (i, path) in paths.iter().enumerate() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let loaded = LoadedConfig::load(path).map(|mut c| {
            if let Some(s) = seed {
                c.config.override_train_seed(s);
            }
            c
        });
        let cfg = match loaded {
            Ok(c) => c,
            Err(e) => {
                hashes.push(format!("unloadable {}", path.display()));
                failed.push(FailedRun { label: stem, reason: e.to_string() });
                continue;
            }
        };
        let label = cfg.config.label();
        hashes.push(cfg.config.hash());
        let dir = out.join(format!("{:02}-{}", i + 1, slug(&label)));
        run_dirs.push(dir.clone());
        match run_train(&cfg, &dir, evaluator, threads) {
            Ok(o) => rows.push(o.report.metrics.expect("successful runs carry metrics")),
            Err(e) => failed.push(FailedRun { label, reason: e.to_string() }),
        }
    }
    let hash = hex(&Sha256::digest(hashes.join("\n").as_bytes()));
    let table = ComparisonTable::new(rows, failed);
    write(&out.join(TABLE_FILE), &format!("# config_hash = {hash}\n{}", table.render_text()))?;
    write(&out.join(TABLE_CSV_FILE), &format!("# config_hash = {hash}\n{}", table.render_csv()))?;
    Ok(SweepOutcome { table, hash, run_dirs })
}
