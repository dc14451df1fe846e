//! Frozen random low-rank functions used as exact ground truth.
//!
//! A generator is a randomly initialised [`SurrogateModel`] of one of the
//! structured kinds. Its output is biased towards a constant so that targets
//! stay near 1 and relative errors are well defined: one embedding channel is
//! pinned to 1 and carries the unit term, the rest are scaled by `scale`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{tabulate, ParamBox, Variable};
use crate::couplings::{pair_count, Architecture, EmbedArch, ModelKind, ModelSpec, SurrogateModel};
use crate::optim::RawData;
use crate::siren::SirenNet;
use crate::{Error, Result};

pub const DEFAULT_SCALE: f64 = 0.3;
pub const DEFAULT_OMEGA0: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Tucker,
    Tt,
    Tr,
    Pairwise,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 4] = [SyntheticKind::Tucker, SyntheticKind::Tt, SyntheticKind::Tr, SyntheticKind::Pairwise];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::Tucker => "tucker",
            SyntheticKind::Tt => "tt",
            SyntheticKind::Tr => "tr",
            SyntheticKind::Pairwise => "pairwise",
        }
    }

    /// Model family that can represent this generator exactly.
    pub fn model_kind(self) -> ModelKind {
        match self {
            SyntheticKind::Tucker => ModelKind::Lrtfr,
            SyntheticKind::Tt => ModelKind::Tt,
            SyntheticKind::Tr => ModelKind::Tr,
            SyntheticKind::Pairwise => ModelKind::Plrnet,
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tucker" | "lrtfr" => Ok(SyntheticKind::Tucker),
            "tt" => Ok(SyntheticKind::Tt),
            "tr" => Ok(SyntheticKind::Tr),
            "pairwise" | "plrnet" => Ok(SyntheticKind::Pairwise),
            other => Err(Error::Config(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

/// Small, smooth coordinate network used by default generators.
pub fn default_embed() -> EmbedArch {
    EmbedArch::new(vec![8], DEFAULT_OMEGA0)
}

/// Model shape for `kind` over `n` inputs.
///
/// `ranks` means: per-coordinate widths for `tucker` and `pairwise` (length
/// `n`); interior bonds `ρ_1..ρ_{n−1}` for `tt` (length `n − 1`); bonds
/// `ρ_0..ρ_{n−1}` for `tr` (length `n`, the ring closes on `ρ_0`).
pub fn lowrank_spec(kind: SyntheticKind, n: usize, ranks: &[usize], embed: EmbedArch) -> Result<ModelSpec> {
    let expect = if kind == SyntheticKind::Tt { n.saturating_sub(1) } else { n };
    if ranks.len() != expect {
        return Err(Error::dim("synthetic ranks", expect, ranks.len()));
    }
    let architecture = match kind {
        SyntheticKind::Tucker => Architecture::Lrtfr { ranks: ranks.to_vec(), embed },
        SyntheticKind::Tt => {
            let mut bonds = vec![1];
            bonds.extend_from_slice(ranks);
            bonds.push(1);
            Architecture::Tt { bonds, embed }
        }
        SyntheticKind::Tr => {
            let mut bonds = ranks.to_vec();
            bonds.push(*ranks.first().ok_or(Error::Empty)?);
            Architecture::Tr { bonds, embed }
        }
        SyntheticKind::Pairwise => Architecture::Plrnet {
            ranks: ranks.to_vec(),
            predictor: embed.clone(),
            embed,
        },
    };
    let spec = ModelSpec::new(n, architecture);
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGenerator {
    model: SurrogateModel,
    seed: u64,
    scale: f64,
}

impl SyntheticGenerator {
    /// Frozen generator with the default conditioning scale.
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        Self::with_scale(spec, seed, DEFAULT_SCALE)
    }

    pub fn with_scale(spec: ModelSpec, seed: u64, scale: f64) -> Result<Self> {
        if spec.kind() == ModelKind::Mlp {
            return Err(Error::Config("synthetic generators need a structured model kind".into()));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("synthetic scale must be positive, got {scale}")));
        }
        let mut model = SurrogateModel::init(spec, seed)?;
        condition(&mut model, scale);
        Ok(Self { model, seed, scale })
    }

    pub fn model(&self) -> &SurrogateModel {
        &self.model
    }

    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn input_dim(&self) -> usize {
        self.model.input_dim()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.model.predict(x)
    }

    /// `x1..xN`, each on `[−1, 1]`.
    pub fn param_box(&self) -> ParamBox {
        ParamBox::uniform((1..=self.input_dim()).map(|i| Variable::new(&format!("x{i}"), "", -1.0, 1.0)).collect())
    }

    pub fn sample(&self, pbox: &ParamBox, count: usize, seed: u64) -> Result<RawData> {
        if pbox.dim() != self.input_dim() {
            return Err(Error::dim("synthetic box variables", self.input_dim(), pbox.dim()));
        }
        tabulate(pbox, count, seed, |x| self.eval(x))
    }

    /// Number of bilinear pair cores (pairwise generators).
    pub fn pair_core_count(&self) -> usize {
        self.model.pair_cores().len()
    }

    pub fn describe(&self) -> String {
        format!("{} generator, N = {}, seed {}, scale {}", self.kind(), self.input_dim(), self.seed, self.scale)
    }
}

/// Frozen generator of `kind` with the default coordinate network.
pub fn synthetic_lowrank(kind: SyntheticKind, n: usize, ranks: &[usize], seed: u64) -> Result<SyntheticGenerator> {
    SyntheticGenerator::new(lowrank_spec(kind, n, ranks, default_embed())?, seed)
}

/// Output row 0 of the linear head becomes the constant 1; other rows are
/// multiplied by `scale`.
fn pin_first_output(net: &mut SirenNet, scale: f64) {
    let layer = net.layers_mut().last_mut().expect("network has a layer");
    let width = layer.inputs();
    for (row, w) in layer.weight_mut().chunks_mut(width).enumerate() {
        let f = if row == 0 { 0.0 } else { scale };
        w.iter_mut().for_each(|v| *v *= f);
    }
    for (row, b) in layer.bias_mut().iter_mut().enumerate() {
        *b = if row == 0 { 1.0 } else { *b * scale };
    }
}

fn condition(model: &mut SurrogateModel, scale: f64) {
    match model.kind() {
        ModelKind::Lrtfr => {
            for net in model.embeds_mut() {
                pin_first_output(net, 1.0);
            }
            let core = model.core_mut().expect("tucker model has a core");
            core.data_mut().iter_mut().for_each(|c| *c *= scale);
            core.data_mut()[0] = 1.0;
        }
        ModelKind::Tt | ModelKind::Tr => {
            for net in model.embeds_mut() {
                pin_first_output(net, scale);
            }
        }
        ModelKind::Plrnet => {
            let n = model.input_dim();
            let head = model.head_mut().expect("pairwise model has a predictor");
            let layer = head.layers_mut().last_mut().expect("network has a layer");
            layer.weight_mut().iter_mut().for_each(|w| *w *= scale);
            layer.bias_mut()[0] = 1.0;
            debug_assert_eq!(head.input_dim(), pair_count(n));
        }
        ModelKind::Mlp => {}
    }
}

/// Ranks of one value repeated for every slot `kind` expects.
pub fn uniform_ranks(kind: SyntheticKind, n: usize, rank: usize) -> Vec<usize> {
    let len = if kind == SyntheticKind::Tt { n.saturating_sub(1) } else { n };
    vec![rank; len]
}
