//! Test-set relative errors and the comparison table.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::couplings::{ModelKind, SurrogateModel};
use crate::optim::Dataset;
use crate::{Error, Result};

/// Default absolute floor of the relative-error denominator, in target units.
pub const DEFAULT_FLOOR: f64 = 1e-8;

/// `e_s = |ŷ_s − y_s| / max(|y_s|, floor)`.
pub fn relative_errors(predictions: &[f64], targets: &[f64], floor: f64) -> Result<Vec<f64>> {
    if predictions.len() != targets.len() {
        return Err(Error::dim("targets", predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    if !(floor > 0.0) {
        return Err(Error::Config(format!("relative-error floor must be positive, got {floor}")));
    }
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| libm::fabs(p - y) / libm::fabs(*y).max(floor))
        .collect())
}

/// `(MRE, MaxRE)`. Errors are summed in ascending order, so the result does
/// not depend on row order.
pub fn mre_maxre(predictions: &[f64], targets: &[f64], floor: f64) -> Result<(f64, f64)> {
    let mut e = relative_errors(predictions, targets, floor)?;
    e.sort_by(f64::total_cmp);
    let mre = e.iter().sum::<f64>() / e.len() as f64;
    let maxre = e.iter().copied().fold(0.0, f64::max);
    Ok((mre, maxre))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub model_kind: ModelKind,
    /// Row label; defaults to the model kind's name.
    pub label: String,
    pub test_mre: f64,
    pub test_maxre: f64,
    pub param_count: usize,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub floor: f64,
    pub samples: usize,
}

/// De-standardized predictions of `model` on `rows` of `data`.
pub fn predict_rows(model: &SurrogateModel, data: &Dataset, rows: &[usize]) -> Result<Vec<f64>> {
    rows.iter()
        .map(|&r| Ok(data.stats().destandardize_target(model.predict(data.std_input(r))?)))
        .collect()
}

/// Relative errors of `model` on `rows`, in original target units.
pub fn evaluate(model: &SurrogateModel, data: &Dataset, rows: &[usize], floor: f64) -> Result<EvalResult> {
    let predictions = predict_rows(model, data, rows)?;
    let targets: Vec<f64> = rows.iter().map(|&r| data.target(r)).collect();
    let (test_mre, test_maxre) = mre_maxre(&predictions, &targets, floor)?;
    Ok(EvalResult {
        model_kind: model.kind(),
        label: String::from(model.kind().name()),
        test_mre,
        test_maxre,
        param_count: model.param_count(),
        epochs_run: 0,
        best_epoch: 0,
        floor,
        samples: rows.len(),
    })
}

/// A sweep entry that did not produce metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedRun {
    pub label: String,
    pub reason: String,
}

/// Rows sorted by test MRE; failures follow in their original order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    rows: Vec<EvalResult>,
    failed: Vec<FailedRun>,
}

pub const TABLE_COLUMNS: [&str; 5] = ["Model", "Params", "Test MRE", "Test MaxRE", "Epoch"];

impl ComparisonTable {
    pub fn new(mut rows: Vec<EvalResult>, failed: Vec<FailedRun>) -> Self {
        // stable: ties keep input order
        rows.sort_by(|a, b| a.test_mre.total_cmp(&b.test_mre));
        Self { rows, failed }
    }

    pub fn rows(&self) -> &[EvalResult] {
        &self.rows
    }

    pub fn failed(&self) -> &[FailedRun] {
        &self.failed
    }

    fn cells(&self) -> Vec<[String; 5]> {
        let mut cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    format!("{:.2e}", r.param_count as f64),
                    format!("{:.2e}", r.test_mre),
                    format!("{:.2e}", r.test_maxre),
                    format!("{}", r.epochs_run),
                ]
            })
            .collect();
        for f in &self.failed {
            cells.push([f.label.clone(), "failed".into(), "-".into(), "-".into(), "-".into()]);
        }
        cells
    }

    /// Aligned plain-text table.
    pub fn render_text(&self) -> String {
        let cells = self.cells();
        let mut widths = TABLE_COLUMNS.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[&str]| {
            for (k, (c, w)) in row.iter().zip(&widths).enumerate() {
                if k == 0 {
                    let _ = write!(out, "{c:<w$}");
                } else {
                    let _ = write!(out, "  {c:>w$}");
                }
            }
            out.push('\n');
        };
        line(&mut out, &TABLE_COLUMNS);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
        for row in &cells {
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        for f in &self.failed {
            let _ = writeln!(out, "# {} failed: {}", f.label, f.reason);
        }
        out
    }

    /// Comma-separated twin with full-precision values.
    pub fn render_csv(&self) -> String {
        let mut out = String::from("model,kind,params,test_mre,test_maxre,epoch,best_epoch,floor,status\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:e},{:e},{},{},{:e},ok",
                r.label,
                r.model_kind.name(),
                r.param_count,
                r.test_mre,
                r.test_maxre,
                r.epochs_run,
                r.best_epoch,
                r.floor
            );
        }
        for f in &self.failed {
            let _ = writeln!(out, "{},,,,,,,,failed", f.label);
        }
        out
    }
}
