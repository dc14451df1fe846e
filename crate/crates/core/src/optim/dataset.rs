use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const TRAIN_FRACTION_NUM: usize = 7;
pub const TRAIN_FRACTION_DEN: usize = 10;

/// Unsplit samples as produced by a generator or read from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawData {
    /// Input column names (without the `x_` prefix used on disk).
    pub names: Vec<String>,
    /// Row-major `m × N`.
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

impl RawData {
    pub fn new(names: Vec<String>, inputs: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Config("dataset needs at least one input column".into()));
        }
        if inputs.len() != n * targets.len() {
            return Err(Error::dim("input matrix length", n * targets.len(), inputs.len()));
        }
        Ok(Self { names, inputs, targets })
    }

    pub fn n_inputs(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_inputs();
        &self.inputs[i * n..(i + 1) * n]
    }

    /// First non-finite cell as `(row, column)`; the target is column `N`.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        (0..self.len()).find_map(|i| {
            self.row(i)
                .iter()
                .chain(core::iter::once(&self.targets[i]))
                .position(|v| !v.is_finite())
                .map(|c| (i, c))
        })
    }
}

/// Affine maps fitted on the training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub target_mean: f64,
    pub target_std: f64,
    /// Input columns whose spread was zero and whose std was clamped to 1.
    pub clamped_inputs: Vec<usize>,
    pub target_clamped: bool,
}

impl Standardization {
    pub fn standardize_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.input_mean.iter().zip(&self.input_std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn standardize_target(&self, y: f64) -> f64 {
        (y - self.target_mean) / self.target_std
    }

    pub fn destandardize_target(&self, y: f64) -> f64 {
        y * self.target_std + self.target_mean
    }
}

/// Samples with a seeded 7:3 split and training-set standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    raw: RawData,
    stats: Standardization,
    /// Standardized copies, row-major.
    std_inputs: Vec<f64>,
    std_targets: Vec<f64>,
    train: Vec<usize>,
    test: Vec<usize>,
}

/// `round(0.7 · m)` with ties rounded up.
pub fn train_size(m: usize) -> usize {
    (TRAIN_FRACTION_NUM * m + TRAIN_FRACTION_DEN / 2) / TRAIN_FRACTION_DEN
}

/// Mean and population standard deviation; a constant column gets its exact
/// value as the mean.
fn column_stats(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut count = 0usize;
    let mut sum = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.clone() {
        count += 1;
        sum += v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        return (lo, 0.0);
    }
    let mean = sum / count as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / count as f64;
    (mean, libm::sqrt(var))
}

impl Dataset {
    /// Shuffles with `seed`, keeps `round(0.7 m)` rows for training and fits
    /// standardization on them.
    pub fn split_and_standardize(raw: RawData, seed: u64) -> Result<Self> {
        let m = raw.len();
        if m < 10 {
            return Err(Error::TooFewRows(m));
        }
        if let Some((row, column)) = raw.first_non_finite() {
            return Err(Error::NonFiniteData { row, column });
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let test = order.split_off(train_size(m));
        Self::with_split(raw, order, test)
    }

    /// Uses an explicit partition; statistics come from `train`.
    pub fn with_split(raw: RawData, train: Vec<usize>, test: Vec<usize>) -> Result<Self> {
        let m = raw.len();
        let mut seen = alloc::vec![false; m];
        for &i in train.iter().chain(&test) {
            if i >= m || core::mem::replace(&mut seen[i], true) {
                return Err(Error::Config("train/test split must partition the rows".into()));
            }
        }
        if seen.iter().any(|s| !s) || train.is_empty() {
            return Err(Error::Config("train/test split must partition the rows".into()));
        }
        let n = raw.n_inputs();
        let mut stats = Standardization {
            input_mean: Vec::with_capacity(n),
            input_std: Vec::with_capacity(n),
            target_mean: 0.0,
            target_std: 1.0,
            clamped_inputs: Vec::new(),
            target_clamped: false,
        };
        for c in 0..n {
            let (mean, std) = column_stats(train.iter().map(|&i| raw.inputs[i * n + c]));
            stats.input_mean.push(mean);
            if std > 0.0 {
                stats.input_std.push(std);
            } else {
                stats.input_std.push(1.0);
                stats.clamped_inputs.push(c);
            }
        }
        let (mean, std) = column_stats(train.iter().map(|&i| raw.targets[i]));
        stats.target_mean = mean;
        if std > 0.0 {
            stats.target_std = std;
        } else {
            stats.target_clamped = true;
        }
        let std_inputs = (0..m).flat_map(|i| stats.standardize_input(raw.row(i))).collect();
        let std_targets = raw.targets.iter().map(|&y| stats.standardize_target(y)).collect();
        Ok(Self {
            raw,
            stats,
            std_inputs,
            std_targets,
            train,
            test,
        })
    }

    pub fn raw(&self) -> &RawData {
        &self.raw
    }

    pub fn stats(&self) -> &Standardization {
        &self.stats
    }

    pub fn n_inputs(&self) -> usize {
        self.raw.n_inputs()
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    pub fn std_input(&self, row: usize) -> &[f64] {
        let n = self.n_inputs();
        &self.std_inputs[row * n..(row + 1) * n]
    }

    pub fn std_target(&self, row: usize) -> f64 {
        self.std_targets[row]
    }

    pub fn target(&self, row: usize) -> f64 {
        self.raw.targets[row]
    }
}
