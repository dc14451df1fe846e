use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::siren::{SirenConfig, DEFAULT_OMEGA0};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Lrtfr,
    Tt,
    Tr,
    Plrnet,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [ModelKind::Mlp, ModelKind::Lrtfr, ModelKind::Tt, ModelKind::Tr, ModelKind::Plrnet];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Mlp => "MLP",
            ModelKind::Lrtfr => "LRTFR",
            ModelKind::Tt => "TT",
            ModelKind::Tr => "TR",
            ModelKind::Plrnet => "PLRNet",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlp" => Ok(ModelKind::Mlp),
            "lrtfr" | "tucker" => Ok(ModelKind::Lrtfr),
            "tt" => Ok(ModelKind::Tt),
            "tr" => Ok(ModelKind::Tr),
            "plrnet" | "pairwise" => Ok(ModelKind::Plrnet),
            other => Err(Error::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Hidden widths and frequency of a coordinate or predictor network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedArch {
    pub hidden: Vec<usize>,
    pub omega0: f64,
}

impl EmbedArch {
    pub fn new(hidden: Vec<usize>, omega0: f64) -> Self {
        Self { hidden, omega0 }
    }

    pub(crate) fn siren(&self, input_dim: usize, output_dim: usize) -> SirenConfig {
        SirenConfig::new(input_dim, self.hidden.clone(), output_dim).with_omega0(self.omega0)
    }
}

impl Default for EmbedArch {
    fn default() -> Self {
        Self {
            hidden: alloc::vec![32],
            omega0: DEFAULT_OMEGA0,
        }
    }
}

/// Shape of a surrogate model.
///
/// `ranks` are the per-coordinate embedding widths `r_i`. `bonds` are the
/// `N + 1` reshape ranks `ρ_0..ρ_N` of a train (`ρ_0 = ρ_N = 1`) or a ring
/// (`ρ_0 = ρ_N`); coordinate `i` emits `ρ_i · ρ_{i+1}` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Architecture {
    Mlp { hidden: Vec<usize>, omega0: f64 },
    Lrtfr { ranks: Vec<usize>, embed: EmbedArch },
    Tt { bonds: Vec<usize>, embed: EmbedArch },
    Tr { bonds: Vec<usize>, embed: EmbedArch },
    Plrnet { ranks: Vec<usize>, embed: EmbedArch, predictor: EmbedArch },
}

impl Architecture {
    pub fn kind(&self) -> ModelKind {
        match self {
            Architecture::Mlp { .. } => ModelKind::Mlp,
            Architecture::Lrtfr { .. } => ModelKind::Lrtfr,
            Architecture::Tt { .. } => ModelKind::Tt,
            Architecture::Tr { .. } => ModelKind::Tr,
            Architecture::Plrnet { .. } => ModelKind::Plrnet,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_dim: usize,
    pub architecture: Architecture,
}

impl ModelSpec {
    pub fn new(input_dim: usize, architecture: Architecture) -> Self {
        Self { input_dim, architecture }
    }

    pub fn kind(&self) -> ModelKind {
        self.architecture.kind()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.input_dim;
        if n == 0 {
            return Err(Error::Config("input dimension must be positive".into()));
        }
        let positive = |name: &str, v: &[usize]| {
            if v.contains(&0) {
                Err(Error::Config(format!("{name} must be positive: {v:?}")))
            } else {
                Ok(())
            }
        };
        match &self.architecture {
            Architecture::Mlp { hidden, omega0 } => {
                SirenConfig::new(n, hidden.clone(), 1).with_omega0(*omega0).validate()?;
            }
            Architecture::Lrtfr { ranks, embed } | Architecture::Plrnet { ranks, embed, .. } => {
                if ranks.len() != n {
                    return Err(Error::dim("number of ranks", n, ranks.len()));
                }
                positive("ranks", ranks)?;
                embed.siren(1, 1).validate()?;
            }
            Architecture::Tt { bonds, embed } | Architecture::Tr { bonds, embed } => {
                if bonds.len() != n + 1 {
                    return Err(Error::dim("number of bond ranks", n + 1, bonds.len()));
                }
                positive("bond ranks", bonds)?;
                embed.siren(1, 1).validate()?;
            }
        }
        match &self.architecture {
            Architecture::Tt { bonds, .. } if bonds[0] != 1 || bonds[n] != 1 => {
                Err(Error::Config(format!("train boundary ranks must be 1, got {} and {}", bonds[0], bonds[n])))
            }
            Architecture::Tr { bonds, .. } if bonds[0] != bonds[n] => {
                Err(Error::Config(format!("ring closure needs ρ_0 == ρ_N, got {} and {}", bonds[0], bonds[n])))
            }
            Architecture::Plrnet { predictor, .. } => {
                if n < 2 {
                    return Err(Error::Config("pairwise model needs at least two inputs".into()));
                }
                predictor.siren(pair_count(n), 1).validate()
            }
            _ => Ok(()),
        }
    }

    /// Output width of each coordinate embedding (empty for the MLP).
    pub fn embed_widths(&self) -> Vec<usize> {
        match &self.architecture {
            Architecture::Mlp { .. } => Vec::new(),
            Architecture::Lrtfr { ranks, .. } | Architecture::Plrnet { ranks, .. } => ranks.clone(),
            Architecture::Tt { bonds, .. } | Architecture::Tr { bonds, .. } => bonds.windows(2).map(|w| w[0] * w[1]).collect(),
        }
    }

    /// Parameter count from the shape alone.
    pub fn param_count(&self) -> usize {
        let n = self.input_dim;
        match &self.architecture {
            Architecture::Mlp { hidden, omega0 } => SirenConfig::new(n, hidden.clone(), 1).with_omega0(*omega0).param_count(),
            Architecture::Lrtfr { ranks, embed } => {
                ranks.iter().map(|&r| embed.siren(1, r).param_count()).sum::<usize>() + ranks.iter().product::<usize>()
            }
            Architecture::Tt { embed, .. } | Architecture::Tr { embed, .. } => {
                self.embed_widths().iter().map(|&w| embed.siren(1, w).param_count()).sum()
            }
            Architecture::Plrnet { ranks, embed, predictor } => {
                let embeds: usize = ranks.iter().map(|&r| embed.siren(1, r).param_count()).sum();
                let cores: usize = pairs(n).map(|(i, j)| ranks[i] * ranks[j]).sum();
                embeds + cores + predictor.siren(pair_count(n), 1).param_count()
            }
        }
    }
}

/// `N(N−1)/2`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Unordered coordinate pairs `(i, j)`, `i < j`, in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}
