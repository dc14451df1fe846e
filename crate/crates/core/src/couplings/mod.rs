//! The five surrogate architectures behind one forward/backward interface.
//!
//! Flat parameter layout (shared by [`SurrogateModel::params`], gradients and
//! checkpoints): coordinate embeddings in input order, then the Tucker core or
//! the pairwise cores in lexicographic pair order, then the predictor `g`.
//! The MLP is a single network.

mod spec;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use spec::{pair_count, pairs, Architecture, EmbedArch, ModelKind, ModelSpec};

use crate::siren::{SirenNet, SirenTape};
use crate::tensor::{self, DenseTensor, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Parts {
    Mlp(SirenNet),
    Lrtfr { embeds: Vec<SirenNet>, core: DenseTensor },
    /// Train and ring share storage; the bonds live in the spec.
    Chain { embeds: Vec<SirenNet> },
    Plrnet { embeds: Vec<SirenNet>, cores: Vec<Matrix>, predictor: SirenNet },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    spec: ModelSpec,
    parts: Parts,
}

/// Forward state for one sample.
#[derive(Debug, Clone)]
pub struct ModelTape {
    embeds: Vec<SirenTape>,
    inner: TapeInner,
}

#[derive(Debug, Clone)]
enum TapeInner {
    Mlp(SirenTape),
    Lrtfr,
    Chain(Vec<Matrix>),
    Plrnet { z: Vec<f64>, predictor: SirenTape },
}

impl ModelTape {
    /// Embedding outputs `R_i(x_i)`.
    pub fn embeddings(&self) -> impl Iterator<Item = &[f64]> {
        self.embeds.iter().map(SirenTape::output)
    }

    /// Pairwise features `z` (pairwise model only).
    pub fn pair_features(&self) -> Option<&[f64]> {
        match &self.inner {
            TapeInner::Plrnet { z, .. } => Some(z),
            _ => None,
        }
    }
}

impl SurrogateModel {
    /// All-zero parameters of the given shape.
    pub fn zeros(spec: ModelSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.input_dim;
        let widths = spec.embed_widths();
        let embeds = |embed: &EmbedArch| -> Result<Vec<SirenNet>> { widths.iter().map(|&w| SirenNet::zeros(embed.siren(1, w))).collect() };
        let parts = match &spec.architecture {
            Architecture::Mlp { hidden, omega0 } => {
                Parts::Mlp(SirenNet::zeros(crate::SirenConfig::new(n, hidden.clone(), 1).with_omega0(*omega0))?)
            }
            Architecture::Lrtfr { ranks, embed } => Parts::Lrtfr {
                embeds: embeds(embed)?,
                core: DenseTensor::zeros(ranks.clone())?,
            },
            Architecture::Tt { embed, .. } | Architecture::Tr { embed, .. } => Parts::Chain { embeds: embeds(embed)? },
            Architecture::Plrnet { ranks, embed, predictor } => Parts::Plrnet {
                embeds: embeds(embed)?,
                cores: pairs(n).map(|(i, j)| Matrix::zeros(ranks[i], ranks[j])).collect(),
                predictor: SirenNet::zeros(predictor.siren(pair_count(n), 1))?,
            },
        };
        Ok(Self { spec, parts })
    }

    /// Random initialisation, deterministic in `seed`.
    ///
    /// Networks use SIREN initialisation with per-network seeds drawn from one
    /// stream. The Tucker core is `U(±√(3/Π r_i))` and each pairwise core
    /// `U(±√(3/(r_i r_j)))`, which keeps the coupled output at unit scale when
    /// the embeddings are.
    pub fn init(spec: ModelSpec, seed: u64) -> Result<Self> {
        let mut model = Self::zeros(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reinit = |net: &mut SirenNet, rng: &mut ChaCha8Rng| -> Result<()> {
            *net = SirenNet::init(net.config().clone(), rng.next_u64())?;
            Ok(())
        };
        match &mut model.parts {
            Parts::Mlp(net) => reinit(net, &mut rng)?,
            Parts::Lrtfr { embeds, core } => {
                for net in embeds.iter_mut() {
                    reinit(net, &mut rng)?;
                }
                let bound = libm::sqrt(3.0 / core.len() as f64);
                for c in core.data_mut() {
                    *c = rng.random_range(-bound..=bound);
                }
            }
            Parts::Chain { embeds } => {
                for net in embeds.iter_mut() {
                    reinit(net, &mut rng)?;
                }
            }
            Parts::Plrnet { embeds, cores, predictor } => {
                for net in embeds.iter_mut() {
                    reinit(net, &mut rng)?;
                }
                for c in cores.iter_mut() {
                    let bound = libm::sqrt(3.0 / c.data().len() as f64);
                    for v in c.data_mut() {
                        *v = rng.random_range(-bound..=bound);
                    }
                }
                reinit(predictor, &mut rng)?;
            }
        }
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.spec.kind()
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    /// Coordinate embedding networks `f_θi` (empty for the MLP).
    pub fn embeds(&self) -> &[SirenNet] {
        match &self.parts {
            Parts::Mlp(_) => &[],
            Parts::Lrtfr { embeds, .. } | Parts::Chain { embeds } | Parts::Plrnet { embeds, .. } => embeds,
        }
    }

    pub fn embeds_mut(&mut self) -> &mut [SirenNet] {
        match &mut self.parts {
            Parts::Mlp(_) => &mut [],
            Parts::Lrtfr { embeds, .. } | Parts::Chain { embeds } | Parts::Plrnet { embeds, .. } => embeds,
        }
    }

    pub fn core(&self) -> Option<&DenseTensor> {
        match &self.parts {
            Parts::Lrtfr { core, .. } => Some(core),
            _ => None,
        }
    }

    pub fn core_mut(&mut self) -> Option<&mut DenseTensor> {
        match &mut self.parts {
            Parts::Lrtfr { core, .. } => Some(core),
            _ => None,
        }
    }

    /// Pairwise cores `C_ij` in lexicographic pair order.
    pub fn pair_cores(&self) -> &[Matrix] {
        match &self.parts {
            Parts::Plrnet { cores, .. } => cores,
            _ => &[],
        }
    }

    pub fn pair_cores_mut(&mut self) -> &mut [Matrix] {
        match &mut self.parts {
            Parts::Plrnet { cores, .. } => cores,
            _ => &mut [],
        }
    }

    /// The global predictor `g` of the pairwise model, or the dense MLP.
    pub fn head(&self) -> Option<&SirenNet> {
        match &self.parts {
            Parts::Plrnet { predictor, .. } => Some(predictor),
            Parts::Mlp(net) => Some(net),
            _ => None,
        }
    }

    pub fn head_mut(&mut self) -> Option<&mut SirenNet> {
        match &mut self.parts {
            Parts::Plrnet { predictor, .. } => Some(predictor),
            Parts::Mlp(net) => Some(net),
            _ => None,
        }
    }

    /// Sum over every populated part.
    pub fn param_count(&self) -> usize {
        let embeds: usize = self.embeds().iter().map(SirenNet::param_count).sum();
        embeds
            + match &self.parts {
                Parts::Mlp(net) => net.param_count(),
                Parts::Lrtfr { core, .. } => core.len(),
                Parts::Chain { .. } => 0,
                Parts::Plrnet { cores, predictor, .. } => {
                    cores.iter().map(|c| c.data().len()).sum::<usize>() + predictor.param_count()
                }
            }
    }

    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for net in self.embeds() {
            net.write_params(&mut out);
        }
        match &self.parts {
            Parts::Mlp(net) => net.write_params(&mut out),
            Parts::Lrtfr { core, .. } => out.extend_from_slice(core.data()),
            Parts::Chain { .. } => {}
            Parts::Plrnet { cores, predictor, .. } => {
                for c in cores {
                    out.extend_from_slice(c.data());
                }
                predictor.write_params(&mut out);
            }
        }
        out
    }

    pub fn set_params(&mut self, src: &[f64]) -> Result<()> {
        if src.len() != self.param_count() {
            return Err(Error::dim("flat parameter vector", self.param_count(), src.len()));
        }
        let mut at = 0;
        for net in self.embeds_mut() {
            at += net.read_params(&src[at..])?;
        }
        match &mut self.parts {
            Parts::Mlp(net) => {
                net.read_params(&src[at..])?;
            }
            Parts::Lrtfr { core, .. } => core.data_mut().copy_from_slice(&src[at..]),
            Parts::Chain { .. } => {}
            Parts::Plrnet { cores, predictor, .. } => {
                for c in cores.iter_mut() {
                    let len = c.data().len();
                    c.data_mut().copy_from_slice(&src[at..at + len]);
                    at += len;
                }
                predictor.read_params(&src[at..])?;
            }
        }
        Ok(())
    }

    /// Human-readable name of a flat parameter index, for diagnostics.
    pub fn describe_param(&self, index: usize) -> String {
        let mut at = 0;
        for (i, net) in self.embeds().iter().enumerate() {
            if index < at + net.param_count() {
                return format!("embed[{i}][{}]", index - at);
            }
            at += net.param_count();
        }
        match &self.parts {
            Parts::Mlp(_) => format!("mlp[{index}]"),
            Parts::Lrtfr { .. } => format!("core[{}]", index - at),
            Parts::Chain { .. } => format!("#{index}"),
            Parts::Plrnet { cores, .. } => {
                for ((i, j), c) in pairs(self.input_dim()).zip(cores) {
                    if index < at + c.data().len() {
                        return format!("pair({},{})[{}]", i + 1, j + 1, index - at);
                    }
                    at += c.data().len();
                }
                format!("predictor[{}]", index - at)
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::dim("model input", self.input_dim(), x.len()));
        }
        Ok(())
    }

    fn bonds(&self) -> &[usize] {
        match &self.spec.architecture {
            Architecture::Tt { bonds, .. } | Architecture::Tr { bonds, .. } => bonds,
            _ => &[],
        }
    }

    fn reshape_cores<'a>(&self, outputs: impl Iterator<Item = &'a [f64]>) -> Vec<Matrix> {
        let bonds = self.bonds();
        outputs
            .zip(bonds.windows(2))
            .map(|(r, w)| Matrix::new(w[0], w[1], r.to_vec()).expect("embedding width matches bond ranks"))
            .collect()
    }

    fn chain_readout(&self, mats: &[Matrix]) -> Result<f64> {
        match self.kind() {
            ModelKind::Tt => tensor::matrix_chain_contract(mats),
            _ => tensor::ring_contract(mats),
        }
    }

    /// `F̂(x)` without recording a tape.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let embed = |nets: &[SirenNet]| -> Result<Vec<Vec<f64>>> { nets.iter().zip(x).map(|(net, &xi)| net.predict(&[xi])).collect() };
        match &self.parts {
            Parts::Mlp(net) => Ok(net.predict(x)?[0]),
            Parts::Lrtfr { embeds, core } => tensor::multi_mode_contract(core, &embed(embeds)?),
            Parts::Chain { embeds } => {
                let outs = embed(embeds)?;
                let mats = self.reshape_cores(outs.iter().map(Vec::as_slice));
                self.chain_readout(&mats)
            }
            Parts::Plrnet { embeds, cores, predictor } => {
                let outs = embed(embeds)?;
                let z = pair_features(self.input_dim(), cores, |i| &outs[i]);
                Ok(predictor.predict(&z)?[0])
            }
        }
    }

    /// `F̂(x)` and the tape for [`backward`](Self::backward).
    pub fn forward(&self, x: &[f64]) -> Result<(f64, ModelTape)> {
        self.check_input(x)?;
        let embed = |nets: &[SirenNet]| -> Result<Vec<SirenTape>> { nets.iter().zip(x).map(|(net, &xi)| net.forward_tape(&[xi])).collect() };
        match &self.parts {
            Parts::Mlp(net) => {
                let tape = net.forward_tape(x)?;
                Ok((tape.output()[0], ModelTape { embeds: Vec::new(), inner: TapeInner::Mlp(tape) }))
            }
            Parts::Lrtfr { embeds, core } => {
                let tapes = embed(embeds)?;
                let factors: Vec<&[f64]> = tapes.iter().map(SirenTape::output).collect();
                let y = tensor::multi_mode_contract(core, &factors)?;
                Ok((y, ModelTape { embeds: tapes, inner: TapeInner::Lrtfr }))
            }
            Parts::Chain { embeds } => {
                let tapes = embed(embeds)?;
                let mats = self.reshape_cores(tapes.iter().map(SirenTape::output));
                let y = self.chain_readout(&mats)?;
                Ok((y, ModelTape { embeds: tapes, inner: TapeInner::Chain(mats) }))
            }
            Parts::Plrnet { embeds, cores, predictor } => {
                let tapes = embed(embeds)?;
                let z = pair_features(self.input_dim(), cores, |i| tapes[i].output());
                let g = predictor.forward_tape(&z)?;
                let y = g.output()[0];
                Ok((y, ModelTape { embeds: tapes, inner: TapeInner::Plrnet { z, predictor: g } }))
            }
        }
    }

    /// Gradient of `grad_out · F̂` over all parameters, in flat layout.
    pub fn backward(&self, tape: &ModelTape, grad_out: f64) -> Result<Vec<f64>> {
        let mut grad = vec![0.0; self.param_count()];
        self.backward_into(tape, grad_out, &mut grad)?;
        Ok(grad)
    }

    /// As [`backward`](Self::backward) but accumulating into `grad`.
    pub fn backward_into(&self, tape: &ModelTape, grad_out: f64, grad: &mut [f64]) -> Result<()> {
        if grad.len() != self.param_count() {
            return Err(Error::dim("model gradient buffer", self.param_count(), grad.len()));
        }
        if tape.embeds.len() != self.embeds().len() {
            return Err(Error::StaleTape(format!(
                "tape has {} embeddings, model has {}",
                tape.embeds.len(),
                self.embeds().len()
            )));
        }
        let embed_total: usize = self.embeds().iter().map(SirenNet::param_count).sum();
        let (grad_embeds, grad_rest) = grad.split_at_mut(embed_total);

        // Cotangents of the embedding outputs R_i.
        let embed_grads: Vec<Vec<f64>> = match (&self.parts, &tape.inner) {
            (Parts::Mlp(net), TapeInner::Mlp(t)) => {
                net.backward_into(t, &[grad_out], grad_rest)?;
                return Ok(());
            }
            (Parts::Lrtfr { core, .. }, TapeInner::Lrtfr) => {
                let factors: Vec<&[f64]> = tape.embeddings().collect();
                tucker_backward(core, &factors, grad_out, grad_rest)?
            }
            (Parts::Chain { .. }, TapeInner::Chain(mats)) => ring_backward(mats, grad_out)?,
            (Parts::Plrnet { cores, predictor, .. }, TapeInner::Plrnet { predictor: g_tape, .. }) => {
                let core_total: usize = cores.iter().map(|c| c.data().len()).sum();
                let (grad_cores, grad_pred) = grad_rest.split_at_mut(core_total);
                let dz = predictor.backward_into(g_tape, &[grad_out], grad_pred)?;
                let outs: Vec<&[f64]> = tape.embeddings().collect();
                pairwise_backward(self.input_dim(), cores, &outs, &dz, grad_cores)
            }
            _ => return Err(Error::StaleTape("tape was recorded for a different model kind".into())),
        };

        let mut at = 0;
        for ((net, t), g) in self.embeds().iter().zip(&tape.embeds).zip(&embed_grads) {
            let len = net.param_count();
            net.backward_into(t, g, &mut grad_embeds[at..at + len])?;
            at += len;
        }
        Ok(())
    }
}

fn pair_features<'a>(n: usize, cores: &[Matrix], outs: impl Fn(usize) -> &'a [f64]) -> Vec<f64> {
    pairs(n).zip(cores).map(|((i, j), c)| c.bilinear(outs(i), outs(j))).collect()
}

/// Single pass over the core: accumulates `∂F/∂core` (outer product of the
/// factors) into `grad_core` and returns `∂F/∂R_i` for every mode.
fn tucker_backward(core: &DenseTensor, factors: &[&[f64]], grad_out: f64, grad_core: &mut [f64]) -> Result<Vec<Vec<f64>>> {
    let shape = core.shape();
    let n = shape.len();
    if grad_core.len() != core.len() {
        return Err(Error::dim("core gradient buffer", core.len(), grad_core.len()));
    }
    let mut out: Vec<Vec<f64>> = shape.iter().map(|&r| vec![0.0; r]).collect();
    let mut idx = vec![0usize; n];
    let mut prefix = vec![1.0; n + 1];
    let mut suffix = vec![1.0; n + 1];
    for (e, &c) in core.data().iter().enumerate() {
        for k in 0..n {
            prefix[k + 1] = prefix[k] * factors[k][idx[k]];
        }
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] * factors[k][idx[k]];
        }
        grad_core[e] += grad_out * prefix[n];
        let gc = grad_out * c;
        for k in 0..n {
            out[k][idx[k]] += gc * prefix[k] * suffix[k + 1];
        }
        for k in (0..n).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(out)
}

/// `∂ trace(C_1⋯C_N) / ∂C_i = (C_{i+1}⋯C_N C_1⋯C_{i-1})ᵀ`, flattened
/// row-major. With unit boundary ranks this is also the train gradient.
fn ring_backward(mats: &[Matrix], grad_out: f64) -> Result<Vec<Vec<f64>>> {
    let n = mats.len();
    let closure = mats[0].rows();
    let mut prefixes = Vec::with_capacity(n);
    let mut acc = Matrix::identity(closure);
    for m in mats {
        prefixes.push(acc.clone());
        acc = acc.matmul(m)?;
    }
    let mut suffixes = vec![Matrix::identity(closure); n];
    let mut acc = Matrix::identity(closure);
    for i in (0..n).rev() {
        suffixes[i] = acc.clone();
        acc = mats[i].matmul(&acc)?;
    }
    (0..n)
        .map(|i| {
            let around = suffixes[i].matmul(&prefixes[i])?;
            Ok(around.transpose().data().iter().map(|v| v * grad_out).collect())
        })
        .collect()
}

fn pairwise_backward(n: usize, cores: &[Matrix], outs: &[&[f64]], dz: &[f64], grad_cores: &mut [f64]) -> Vec<Vec<f64>> {
    let mut embed_grads: Vec<Vec<f64>> = outs.iter().map(|r| vec![0.0; r.len()]).collect();
    let mut at = 0;
    for (((i, j), c), &d) in pairs(n).zip(cores).zip(dz) {
        let (ri, rj) = (outs[i], outs[j]);
        let (rows, cols) = (c.rows(), c.cols());
        let g = &mut grad_cores[at..at + rows * cols];
        for a in 0..rows {
            let row = &c.data()[a * cols..(a + 1) * cols];
            let grow = &mut g[a * cols..(a + 1) * cols];
            let mut c_rj = 0.0;
            for b in 0..cols {
                grow[b] += d * ri[a] * rj[b];
                c_rj += row[b] * rj[b];
                embed_grads[j][b] += d * ri[a] * row[b];
            }
            embed_grads[i][a] += d * c_rj;
        }
        at += rows * cols;
    }
    embed_grads
}
