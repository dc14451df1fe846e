//! Sine-activated multilayer perceptrons with hand-written reverse mode.
//!
//! Hidden layers compute `sin(ω0 · (W h + b))`; the last layer is affine
//! unless `final_linear` is off. The forward pass records a [`SirenTape`]
//! (inputs, pre-activations and the cosines the backward pass needs).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_OMEGA0: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirenConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub omega0: f64,
    pub final_linear: bool,
}

impl SirenConfig {
    pub fn new(input_dim: usize, hidden_dims: Vec<usize>, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dims,
            output_dim,
            omega0: DEFAULT_OMEGA0,
            final_linear: true,
        }
    }

    pub fn with_omega0(mut self, omega0: f64) -> Self {
        self.omega0 = omega0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_dims.contains(&0) {
            return Err(Error::Config(format!("all layer widths must be positive: {self:?}")));
        }
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::Config(format!("omega0 must be positive, got {}", self.omega0)));
        }
        Ok(())
    }

    /// Widths `[input, hidden.., output]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.output_dim);
        dims
    }

    pub fn param_count(&self) -> usize {
        self.dims().windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    inputs: usize,
    outputs: usize,
    /// `outputs × inputs`, row-major.
    weight: Vec<f64>,
    bias: Vec<f64>,
    sine: bool,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn weight_mut(&mut self) -> &mut [f64] {
        &mut self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn is_sine(&self) -> bool {
        self.sine
    }

    fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirenNet {
    config: SirenConfig,
    layers: Vec<Layer>,
}

/// Cached forward state for one input.
#[derive(Debug, Clone)]
pub struct SirenTape {
    /// `acts[l]` is the input of layer `l`; the last entry is the output.
    acts: Vec<Vec<f64>>,
    /// `ω0 · cos(ω0 · pre)` for sine layers, empty for the linear head.
    slopes: Vec<Vec<f64>>,
}

impl SirenTape {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("tape has at least input and output")
    }
}

impl SirenNet {
    /// All-zero network of the given shape.
    pub fn zeros(config: SirenConfig) -> Result<Self> {
        config.validate()?;
        let dims = config.dims();
        let last = dims.len() - 2;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| Layer {
                inputs: w[0],
                outputs: w[1],
                weight: vec![0.0; w[0] * w[1]],
                bias: vec![0.0; w[1]],
                sine: l < last || !config.final_linear,
            })
            .collect();
        Ok(Self { config, layers })
    }

    /// SIREN initialisation: first layer `U(±1/fan_in)`, later sine layers
    /// `U(±√(6/fan_in)/ω0)`, linear head `U(±√(6/fan_in))`, zero biases.
    pub fn init(config: SirenConfig, seed: u64) -> Result<Self> {
        let mut net = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega0 = net.config.omega0;
        for (l, layer) in net.layers.iter_mut().enumerate() {
            let fan_in = layer.inputs as f64;
            let bound = if l == 0 {
                1.0 / fan_in
            } else if layer.sine {
                libm::sqrt(6.0 / fan_in) / omega0
            } else {
                libm::sqrt(6.0 / fan_in)
            };
            for w in &mut layer.weight {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn config(&self) -> &SirenConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.config.output_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Flattened parameters: for each layer, weights row-major then bias.
    pub fn write_params(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend_from_slice(&layer.weight);
            out.extend_from_slice(&layer.bias);
        }
    }

    /// Reads parameters in [`write_params`](Self::write_params) order,
    /// returning how many values were consumed.
    pub fn read_params(&mut self, src: &[f64]) -> Result<usize> {
        let need = self.param_count();
        if src.len() < need {
            return Err(Error::dim("siren parameter slice", need, src.len()));
        }
        let mut at = 0;
        for layer in &mut self.layers {
            let (w, b) = (layer.weight.len(), layer.bias.len());
            layer.weight.copy_from_slice(&src[at..at + w]);
            layer.bias.copy_from_slice(&src[at + w..at + w + b]);
            at += w + b;
        }
        Ok(at)
    }

    /// Output only; no tape.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let omega0 = self.config.omega0;
        let mut h = x.to_vec();
        for layer in &self.layers {
            let mut next = affine(layer, &h);
            if layer.sine {
                for v in &mut next {
                    *v = libm::sin(omega0 * *v);
                }
            }
            h = next;
        }
        Ok(h)
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, SirenTape)> {
        let tape = self.forward_tape(x)?;
        Ok((tape.output().to_vec(), tape))
    }

    pub fn forward_tape(&self, x: &[f64]) -> Result<SirenTape> {
        self.check_input(x)?;
        let omega0 = self.config.omega0;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut slopes = Vec::with_capacity(self.layers.len());
        acts.push(x.to_vec());
        for layer in &self.layers {
            let mut pre = affine(layer, acts.last().expect("non-empty"));
            let slope = if layer.sine {
                let mut slope = Vec::with_capacity(pre.len());
                for v in &mut pre {
                    let (s, c) = libm::sincos(omega0 * *v);
                    *v = s;
                    slope.push(omega0 * c);
                }
                slope
            } else {
                Vec::new()
            };
            acts.push(pre);
            slopes.push(slope);
        }
        Ok(SirenTape { acts, slopes })
    }

    /// Reverse pass. Parameter gradients are **added** into `grad_params`
    /// (laid out as [`write_params`](Self::write_params)); the input gradient
    /// is returned.
    pub fn backward_into(&self, tape: &SirenTape, grad_out: &[f64], grad_params: &mut [f64]) -> Result<Vec<f64>> {
        self.check_tape(tape)?;
        if grad_out.len() != self.output_dim() {
            return Err(Error::dim("siren output gradient", self.output_dim(), grad_out.len()));
        }
        if grad_params.len() != self.param_count() {
            return Err(Error::dim("siren gradient buffer", self.param_count(), grad_params.len()));
        }
        let mut offset = grad_params.len();
        let mut delta = grad_out.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if layer.sine {
                for (d, s) in delta.iter_mut().zip(&tape.slopes[l]) {
                    *d *= s;
                }
            }
            let input = &tape.acts[l];
            offset -= layer.param_count();
            let (gw, gb) = grad_params[offset..offset + layer.param_count()].split_at_mut(layer.weight.len());
            let mut grad_in = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                gb[o] += d;
                if d == 0.0 {
                    continue;
                }
                let wrow = &layer.weight[o * layer.inputs..(o + 1) * layer.inputs];
                let grow = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                for ((g, &a), (gi, &w)) in grow.iter_mut().zip(input).zip(grad_in.iter_mut().zip(wrow)) {
                    *g += d * a;
                    *gi += d * w;
                }
            }
            delta = grad_in;
        }
        Ok(delta)
    }

    /// Convenience wrapper returning fresh `(grad_params, grad_input)`.
    pub fn backward(&self, tape: &SirenTape, grad_out: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut grad = vec![0.0; self.param_count()];
        let grad_input = self.backward_into(tape, grad_out, &mut grad)?;
        Ok((grad, grad_input))
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.config.input_dim {
            return Err(Error::dim("siren input", self.config.input_dim, x.len()));
        }
        Ok(())
    }

    fn check_tape(&self, tape: &SirenTape) -> Result<()> {
        if tape.acts.len() != self.layers.len() + 1 || tape.slopes.len() != self.layers.len() {
            return Err(Error::StaleTape(format!(
                "tape has {} layers, network has {}",
                tape.slopes.len(),
                self.layers.len()
            )));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            let expected_slope = if layer.sine { layer.outputs } else { 0 };
            if tape.acts[l].len() != layer.inputs || tape.acts[l + 1].len() != layer.outputs || tape.slopes[l].len() != expected_slope {
                return Err(Error::StaleTape(format!("layer {l} widths differ")));
            }
        }
        Ok(())
    }
}

fn affine(layer: &Layer, h: &[f64]) -> Vec<f64> {
    layer
        .weight
        .chunks_exact(layer.inputs)
        .zip(&layer.bias)
        .map(|(row, &b)| row.iter().zip(h).map(|(w, x)| w * x).sum::<f64>() + b)
        .collect()
}
