//! Low-rank tensor-function surrogate models.
//!
//! Every model maps an input vector `x ∈ R^N` to a scalar by embedding each
//! coordinate with a small sine-activated network and coupling the embeddings
//! through a structured low-rank form:
//!
//! * [`Architecture::Lrtfr`]: a Tucker core contracted with all embeddings.
//! * [`Architecture::Tt`] / [`Architecture::Tr`]: embeddings reshaped into
//!   matrix cores and contracted as a chain (train) or a ring (trace).
//! * [`Architecture::Plrnet`]: bilinear pairwise features `R_iᵀ C_ij R_j`
//!   fed to a global predictor network.
//! * [`Architecture::Mlp`]: a dense sine-activated baseline.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the command line live in the companion `plrnet` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod couplings;
pub mod datagen;
mod error;
pub mod metrics;
pub mod optim;
pub mod siren;
pub mod tensor;

pub use couplings::{Architecture, EmbedArch, ModelKind, ModelSpec, ModelTape, SurrogateModel};
pub use error::{Error, Result};
pub use metrics::EvalResult;
pub use optim::{Dataset, RawData, TrainConfig, TrainReport};
pub use siren::{SirenConfig, SirenNet};
pub use tensor::{DenseTensor, Matrix};
