//! Benchmark data: parameter boxes, closed-form EM generators and frozen
//! low-rank ground-truth functions.

pub mod bessel;
pub mod microstrip;
pub mod rcs;
pub mod synthetic;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::optim::RawData;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub unit: String,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn new(name: &str, unit: &str, lower: f64, upper: f64) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            lower,
            upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Sampling {
    Uniform,
    /// Cartesian grid with `levels[i]` evenly spaced values per variable,
    /// endpoints included.
    Grid { levels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub variables: Vec<Variable>,
    pub sampling: Sampling,
}

impl ParamBox {
    pub fn uniform(variables: Vec<Variable>) -> Self {
        Self {
            variables,
            sampling: Sampling::Uniform,
        }
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(Error::Config("parameter box has no variables".into()));
        }
        for v in &self.variables {
            if !(v.lower < v.upper) || !v.lower.is_finite() || !v.upper.is_finite() {
                return Err(Error::Config(format!("variable `{}` needs lower < upper, got [{}, {}]", v.name, v.lower, v.upper)));
            }
        }
        if let Sampling::Grid { levels } = &self.sampling {
            if levels.len() != self.variables.len() || levels.contains(&0) {
                return Err(Error::Config(format!("grid levels {levels:?} do not match {} variables", self.variables.len())));
            }
        }
        Ok(())
    }

    pub fn contains(&self, row: &[f64]) -> bool {
        row.len() == self.dim() && row.iter().zip(&self.variables).all(|(x, v)| v.lower <= *x && *x <= v.upper)
    }

    /// Number of rows `sample_box` yields for a requested `count`.
    pub fn row_count(&self, count: usize) -> usize {
        match &self.sampling {
            Sampling::Uniform => count,
            Sampling::Grid { levels } => levels.iter().product(),
        }
    }
}

/// Streaming row source for a box; uniform mode can draw replacement rows.
pub struct BoxSampler<'a> {
    pbox: &'a ParamBox,
    rng: ChaCha8Rng,
    next_grid: usize,
}

impl<'a> BoxSampler<'a> {
    pub fn new(pbox: &'a ParamBox, seed: u64) -> Result<Self> {
        pbox.validate()?;
        Ok(Self {
            pbox,
            rng: ChaCha8Rng::seed_from_u64(seed),
            next_grid: 0,
        })
    }

    pub fn uniform_row(&mut self) -> Vec<f64> {
        self.pbox
            .variables
            .iter()
            .map(|v| self.rng.random_range(v.lower..v.upper))
            .collect()
    }

    /// Grid row by flat index, last variable fastest.
    pub fn grid_row(&self, mut index: usize) -> Option<Vec<f64>> {
        let Sampling::Grid { levels } = &self.pbox.sampling else {
            return None;
        };
        if index >= levels.iter().product() {
            return None;
        }
        let mut row = alloc::vec![0.0; levels.len()];
        for k in (0..levels.len()).rev() {
            let (v, n) = (&self.pbox.variables[k], levels[k]);
            let i = index % n;
            index /= n;
            row[k] = if n == 1 {
                v.lower
            } else if i == n - 1 {
                v.upper
            } else {
                v.lower + (v.upper - v.lower) * i as f64 / (n - 1) as f64
            };
        }
        Some(row)
    }

    fn next_row(&mut self) -> Option<Vec<f64>> {
        match self.pbox.sampling {
            Sampling::Uniform => Some(self.uniform_row()),
            Sampling::Grid { .. } => {
                let row = self.grid_row(self.next_grid);
                self.next_grid += 1;
                row
            }
        }
    }
}

/// Rows inside the box: `count` i.i.d. uniform draws, or the full grid
/// (`count` is ignored in grid mode). Row-major.
pub fn sample_box(pbox: &ParamBox, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let mut sampler = BoxSampler::new(pbox, seed)?;
    let rows = pbox.row_count(count);
    let mut out = Vec::with_capacity(rows * pbox.dim());
    for _ in 0..rows {
        out.extend(sampler.next_row().expect("row count matches sampling mode"));
    }
    Ok(out)
}

/// Evaluates `response` on box samples. In uniform mode a row whose
/// response is [`Error::SingularReturnLoss`] is replaced by a fresh draw.
pub fn tabulate<F>(pbox: &ParamBox, count: usize, seed: u64, response: F) -> Result<RawData>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    let mut sampler = BoxSampler::new(pbox, seed)?;
    let rows = pbox.row_count(count);
    let mut inputs = Vec::with_capacity(rows * pbox.dim());
    let mut targets = Vec::with_capacity(rows);
    while targets.len() < rows {
        let row = sampler.next_row().expect("row count matches sampling mode");
        match response(&row) {
            Ok(y) => {
                inputs.extend_from_slice(&row);
                targets.push(y);
            }
            Err(Error::SingularReturnLoss) if pbox.sampling == Sampling::Uniform => continue,
            Err(e) => return Err(e),
        }
    }
    RawData::new(pbox.names(), inputs, targets)
}
