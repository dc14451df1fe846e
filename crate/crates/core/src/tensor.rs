//! Dense tensors and the contractions the couplings are built from.
//!
//! Storage is row-major (last index fastest). Every contraction allocates a
//! fresh output; inputs are never mutated.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// N-way array of `f64` with an explicit shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::Config("tensor shape must have at least one mode".into()));
        }
        if let Some(mode) = shape.iter().position(|&s| s == 0) {
            return Err(Error::dim(format!("tensor mode {mode} size"), 1, 0));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::dim("tensor data length", len, data.len()));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![0.0; len])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        strides_of(&self.shape)
    }

    pub fn get(&self, index: &[usize]) -> Option<f64> {
        self.offset(index).map(|o| self.data[o])
    }

    pub fn set(&mut self, index: &[usize], value: f64) -> Result<()> {
        let o = self
            .offset(index)
            .ok_or_else(|| Error::Config(format!("index {index:?} out of bounds for {:?}", self.shape)))?;
        self.data[o] = value;
        Ok(())
    }

    fn offset(&self, index: &[usize]) -> Option<usize> {
        if index.len() != self.shape.len() {
            return None;
        }
        let mut offset = 0;
        for (&i, &s) in index.iter().zip(&self.shape) {
            if i >= s {
                return None;
            }
            offset = offset * s + i;
        }
        Some(offset)
    }
}

pub(crate) fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    strides
}

/// Contracts mode `n` of `t` with `v`.
///
/// The result has one mode fewer. Contracting the only mode of an order-1
/// tensor yields a shape-`[1]` tensor holding the scalar.
pub fn mode_n_vec_product(t: &DenseTensor, n: usize, v: &[f64]) -> Result<DenseTensor> {
    if n >= t.order() {
        return Err(Error::dim(format!("mode index {n}"), t.order(), n));
    }
    if v.len() != t.shape[n] {
        return Err(Error::dim(format!("mode {n} vector length"), t.shape[n], v.len()));
    }
    let outer: usize = t.shape[..n].iter().product();
    let inner: usize = t.shape[n + 1..].iter().product();
    let size = t.shape[n];
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        let block = &t.data[o * size * inner..(o + 1) * size * inner];
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (k, &vk) in v.iter().enumerate() {
            let row = &block[k * inner..(k + 1) * inner];
            for (d, &x) in dst.iter_mut().zip(row) {
                *d += x * vk;
            }
        }
    }
    let mut shape: Vec<usize> = t.shape[..n].iter().chain(&t.shape[n + 1..]).copied().collect();
    if shape.is_empty() {
        shape.push(1);
    }
    Ok(DenseTensor { shape, data: out })
}

/// Full contraction `Σ core[k1..kN] Π factors[i][k_i]`, last mode first.
pub fn multi_mode_contract<V: AsRef<[f64]>>(core: &DenseTensor, factors: &[V]) -> Result<f64> {
    let order: Vec<usize> = (0..core.order()).rev().collect();
    multi_mode_contract_in_order(core, factors, &order)
}

/// Same contraction as [`multi_mode_contract`], applying the mode products in
/// the given order of original mode indices.
pub fn multi_mode_contract_in_order<V: AsRef<[f64]>>(
    core: &DenseTensor,
    factors: &[V],
    order: &[usize],
) -> Result<f64> {
    if factors.len() != core.order() {
        return Err(Error::dim("number of factors", core.order(), factors.len()));
    }
    let mut seen = vec![false; core.order()];
    if order.len() != core.order() || order.iter().any(|&m| m >= seen.len() || core::mem::replace(&mut seen[m], true)) {
        return Err(Error::Config(format!("{order:?} is not a permutation of the core modes")));
    }
    for (i, f) in factors.iter().enumerate() {
        if f.as_ref().len() != core.shape[i] {
            return Err(Error::dim(format!("factor {i} length"), core.shape[i], f.as_ref().len()));
        }
    }
    // `remaining` maps current mode positions back to original mode indices.
    let mut remaining: Vec<usize> = (0..core.order()).collect();
    let mut t = core.clone();
    for &mode in order {
        let pos = remaining.iter().position(|&m| m == mode).expect("validated permutation");
        t = mode_n_vec_product(&t, pos, factors[mode].as_ref())?;
        remaining.remove(pos);
    }
    Ok(t.data[0])
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::dim(format!("{rows}x{cols} matrix data length"), rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::dim("matrix product inner dimension", self.cols, rhs.rows));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// `xᵀ M y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(y.len(), self.cols);
        let mut acc = 0.0;
        for (r, &xr) in x.iter().enumerate() {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let dot: f64 = row.iter().zip(y).map(|(a, b)| a * b).sum();
            acc += xr * dot;
        }
        acc
    }
}

fn check_chain(mats: &[Matrix]) -> Result<()> {
    if mats.is_empty() {
        return Err(Error::Empty);
    }
    for (i, pair) in mats.windows(2).enumerate() {
        if pair[0].cols != pair[1].rows {
            return Err(Error::dim(
                format!("inner dimension between cores {} and {}", i + 1, i + 2),
                pair[0].cols,
                pair[1].rows,
            ));
        }
    }
    Ok(())
}

/// Left-to-right product `C_1 C_2 ⋯ C_N`.
pub fn chain_product(mats: &[Matrix]) -> Result<Matrix> {
    check_chain(mats)?;
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = acc.matmul(m)?;
    }
    Ok(acc)
}

/// Tensor-train readout: the 1×1 product of a chain with unit boundary ranks.
pub fn matrix_chain_contract(mats: &[Matrix]) -> Result<f64> {
    check_chain(mats)?;
    let first = &mats[0];
    let last = &mats[mats.len() - 1];
    if first.rows != 1 {
        return Err(Error::dim("leading boundary rank", 1, first.rows));
    }
    if last.cols != 1 {
        return Err(Error::dim("trailing boundary rank", 1, last.cols));
    }
    Ok(chain_product(mats)?.data[0])
}

/// Tensor-ring readout: `trace(C_1 C_2 ⋯ C_N)`.
pub fn ring_contract(mats: &[Matrix]) -> Result<f64> {
    check_chain(mats)?;
    let first = &mats[0];
    let last = &mats[mats.len() - 1];
    if last.cols != first.rows {
        return Err(Error::dim(
            format!("ring closure between cores {} and 1", mats.len()),
            first.rows,
            last.cols,
        ));
    }
    Ok(chain_product(mats)?.trace())
}
