//! Training protocol: standardized 7:3 split, MSE loss, AdamW and early
//! stopping that keeps the best-test-loss checkpoint.

mod adamw;
mod dataset;

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adamw::{adamw_step, AdamWConfig, AdamWState};
pub use dataset::{train_size, Dataset, RawData, Standardization};

use crate::couplings::{ModelKind, SurrogateModel};
use crate::{Error, Result};

/// Rows per partial sum. Gradients are summed within a chunk in row order and
/// chunk sums are combined in chunk order, so any executor that respects the
/// chunking produces bit-identical results.
pub const GRAD_CHUNK: usize = 64;

/// Mean squared error and its gradient `2(ŷ − y)/m` with respect to `ŷ`.
pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>)> {
    if predictions.len() != targets.len() {
        return Err(Error::dim("targets", predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    let m = predictions.len() as f64;
    let loss = predictions.iter().zip(targets).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / m;
    let grad = predictions.iter().zip(targets).map(|(p, y)| 2.0 * (p - y) / m).collect();
    Ok((loss, grad))
}

/// Per-chunk work of one gradient evaluation: `Σ (ŷ−y)²` over the rows and
/// the gradient of `Σ (ŷ−y)² / denom` added into `grad`.
pub fn chunk_loss_grad(model: &SurrogateModel, data: &Dataset, rows: &[usize], denom: f64, grad: &mut [f64]) -> Result<f64> {
    let mut sse = 0.0;
    for &row in rows {
        let (y_hat, tape) = model.forward(data.std_input(row))?;
        let r = y_hat - data.std_target(row);
        sse += r * r;
        model.backward_into(&tape, 2.0 * r / denom, grad)?;
    }
    Ok(sse)
}

/// Sum of squared standardized residuals over `rows`.
pub fn chunk_sse(model: &SurrogateModel, data: &Dataset, rows: &[usize]) -> Result<f64> {
    rows.iter().try_fold(0.0, |acc, &row| {
        let r = model.predict(data.std_input(row))? - data.std_target(row);
        Ok(acc + r * r)
    })
}

/// Evaluates loss and gradient over a set of rows.
///
/// Implementations must split `rows` into [`GRAD_CHUNK`]-sized chunks, run
/// [`chunk_loss_grad`] / [`chunk_sse`] on each, and reduce the partial
/// results in chunk order.
pub trait Evaluator {
    /// Mean squared error over `rows`; its gradient is written to `grad`.
    fn loss_and_grad(&self, model: &SurrogateModel, data: &Dataset, rows: &[usize], grad: &mut [f64]) -> Result<f64>;

    /// Mean squared error over `rows`.
    fn loss(&self, model: &SurrogateModel, data: &Dataset, rows: &[usize]) -> Result<f64>;
}

/// Single-threaded reference executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Evaluator for Serial {
    fn loss_and_grad(&self, model: &SurrogateModel, data: &Dataset, rows: &[usize], grad: &mut [f64]) -> Result<f64> {
        grad.fill(0.0);
        let denom = rows.len() as f64;
        let mut partial = vec![0.0; grad.len()];
        let mut sse = 0.0;
        for chunk in rows.chunks(GRAD_CHUNK) {
            partial.fill(0.0);
            sse += chunk_loss_grad(model, data, chunk, denom, &mut partial)?;
            for (g, p) in grad.iter_mut().zip(&partial) {
                *g += p;
            }
        }
        Ok(sse / denom)
    }

    fn loss(&self, model: &SurrogateModel, data: &Dataset, rows: &[usize]) -> Result<f64> {
        let mut sse = 0.0;
        for chunk in rows.chunks(GRAD_CHUNK) {
            sse += chunk_sse(model, data, chunk)?;
        }
        Ok(sse / rows.len() as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub max_epochs: usize,
    /// `None` trains full-batch.
    pub batch_size: Option<usize>,
    /// Epochs without a new best test loss before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            weight_decay: 0.0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            max_epochs: 1000,
            batch_size: None,
            patience: 500,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(alloc::format!("{what}: {self:?}")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight decay must be non-negative");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive");
        }
        if self.batch_size == Some(0) {
            return bad("batch size must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        Ok(())
    }

    pub fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Loss curves and bookkeeping of one training run. Losses are MSE on
/// standardized targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    pub model_kind: ModelKind,
    pub param_count: usize,
    /// Training loss of epoch `e` (index `e − 1`), averaged over its batches
    /// before each update.
    pub train_loss: Vec<f64>,
    /// Test loss after the last update of each epoch.
    pub test_loss: Vec<f64>,
    pub epochs_run: usize,
    /// 1-based epoch of the retained checkpoint; 0 when no epoch ran.
    pub best_epoch: usize,
    pub best_test_loss: Option<f64>,
    pub stopped_early: bool,
    pub seed: u64,
}

/// A run that hit a numerical failure; `report` covers the epochs before it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainFailure {
    pub error: Error,
    pub report: TrainReport,
    /// Best checkpoint seen before the failure (initial model if none).
    pub model: SurrogateModel,
}

impl core::fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "training aborted after {} epochs: {}", self.report.epochs_run, self.error)
    }
}

/// Trains `model` on the standardized training rows of `data`, keeping the
/// parameters with the lowest test loss.
#[allow(clippy::result_large_err)]
pub fn train(
    model: SurrogateModel,
    data: &Dataset,
    config: &TrainConfig,
    evaluator: &dyn Evaluator,
) -> Result<(SurrogateModel, TrainReport), TrainFailure> {
    let mut report = TrainReport {
        config: config.clone(),
        model_kind: model.kind(),
        param_count: model.param_count(),
        train_loss: Vec::new(),
        test_loss: Vec::new(),
        epochs_run: 0,
        best_epoch: 0,
        best_test_loss: None,
        stopped_early: false,
        seed: config.seed,
    };
    let fail = |error: Error, report: TrainReport, model: SurrogateModel| TrainFailure { error, report, model };
    if let Err(e) = config.validate() {
        return Err(fail(e, report, model));
    }
    if model.input_dim() != data.n_inputs() {
        let e = Error::dim("model input dimension vs dataset arity", data.n_inputs(), model.input_dim());
        return Err(fail(e, report, model));
    }

    let adam = config.adamw();
    let mut working = model.clone();
    let mut best = model;
    let mut params = working.params();
    let mut grad = vec![0.0; params.len()];
    let mut state = AdamWState::new(params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order = data.train().to_vec();
    let batch = config.batch_size.unwrap_or(order.len()).min(order.len()).max(1);
    let mut since_best = 0;

    for epoch in 1..=config.max_epochs {
        if config.batch_size.is_some() {
            order.shuffle(&mut rng);
        }
        let mut weighted = 0.0;
        for rows in order.chunks(batch) {
            let loss = match evaluator.loss_and_grad(&working, data, rows, &mut grad) {
                Ok(l) => l,
                Err(e) => return Err(fail(e, report, best)),
            };
            if !loss.is_finite() {
                return Err(fail(Error::NonFiniteLoss { epoch }, report, best));
            }
            if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
                let param = working.describe_param(i);
                return Err(fail(Error::NonFiniteGradient { epoch, param }, report, best));
            }
            weighted += loss * rows.len() as f64;
            adamw_step(&mut params, &grad, &mut state, &adam).expect("gradient checked finite");
            working.set_params(&params).expect("flat layout unchanged");
        }
        let test_loss = match evaluator.loss(&working, data, data.test()) {
            Ok(l) if l.is_finite() => l,
            Ok(_) => return Err(fail(Error::NonFiniteLoss { epoch }, report, best)),
            Err(e) => return Err(fail(e, report, best)),
        };
        report.train_loss.push(weighted / order.len() as f64);
        report.test_loss.push(test_loss);
        report.epochs_run = epoch;
        if report.best_test_loss.is_none_or(|b| test_loss < b) {
            report.best_test_loss = Some(test_loss);
            report.best_epoch = epoch;
            best = working.clone();
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                report.stopped_early = true;
                break;
            }
        }
    }
    Ok((best, report))
}
