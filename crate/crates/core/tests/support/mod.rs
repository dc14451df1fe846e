//! Independent reference implementations shared by the integration tests and
//! the acceptance suite. Nothing here calls the library's evaluation code:
//! models are read through their parameter accessors only.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use plrnet_core::couplings::{pairs, Architecture, EmbedArch, ModelKind, ModelSpec, SurrogateModel};
use plrnet_core::tensor::{DenseTensor, Matrix};
use plrnet_core::SirenNet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> DenseTensor {
    let len = shape.iter().product();
    DenseTensor::new(shape.to_vec(), random_vec(rng, len)).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, random_vec(rng, rows * cols)).unwrap()
}

/// Every multi-index of `shape`, last index fastest.
pub fn multi_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in shape {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |k| {
                    let mut p = prefix.clone();
                    p.push(k);
                    p
                })
            })
            .collect();
    }
    out
}

/// `Σ_k core[k] Π_i factors[i][k_i]` by explicit enumeration.
pub fn naive_full_contract(core: &DenseTensor, factors: &[Vec<f64>]) -> f64 {
    multi_indices(core.shape())
        .iter()
        .map(|idx| core.get(idx).unwrap() * idx.iter().enumerate().map(|(i, &k)| factors[i][k]).product::<f64>())
        .sum()
}

/// Matrices as nested rows.
pub fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect()).collect()
}

pub fn naive_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let inner = b.len();
    let cols = b[0].len();
    a.iter()
        .map(|row| (0..cols).map(|c| (0..inner).map(|k| row[k] * b[k][c]).sum()).collect())
        .collect()
}

pub fn naive_chain(mats: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = naive_matmul(&acc, m);
    }
    acc
}

pub fn naive_trace(m: &[Vec<f64>]) -> f64 {
    (0..m.len()).map(|i| m[i][i]).sum()
}

/// Sine network evaluated straight from its layer parameters.
pub fn naive_siren(net: &SirenNet, x: &[f64]) -> Vec<f64> {
    let omega0 = net.config().omega0;
    let mut h = x.to_vec();
    for layer in net.layers() {
        let (w, b) = (layer.weight(), layer.bias());
        let mut next = vec![0.0; layer.outputs()];
        for (o, v) in next.iter_mut().enumerate() {
            let mut s = b[o];
            for (i, hi) in h.iter().enumerate() {
                s += w[o * layer.inputs() + i] * hi;
            }
            *v = if layer.is_sine() { libm::sin(omega0 * s) } else { s };
        }
        h = next;
    }
    h
}

fn embeddings(model: &SurrogateModel, x: &[f64]) -> Vec<Vec<f64>> {
    model.embeds().iter().zip(x).map(|(net, &xi)| naive_siren(net, &[xi])).collect()
}

fn reshaped(r: &[f64], rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|a| r[a * cols..(a + 1) * cols].to_vec()).collect()
}

/// Reference forward for every model kind.
pub fn naive_forward(model: &SurrogateModel, x: &[f64]) -> f64 {
    naive_forward_with_scale(model, x).0
}

/// Reference forward plus the magnitude of the coupling stage: for the
/// Tucker, train and ring forms the same contraction over absolute values,
/// which bounds how much cancellation can amplify rounding. For the network
/// outputs (MLP, pairwise predictor) the scale is the value itself.
pub fn naive_forward_with_scale(model: &SurrogateModel, x: &[f64]) -> (f64, f64) {
    let abs = |v: &[Vec<f64>]| v.iter().map(|r| r.iter().map(|a| a.abs()).collect::<Vec<f64>>()).collect::<Vec<_>>();
    match &model.spec().architecture {
        Architecture::Mlp { .. } => {
            let y = naive_siren(model.head().unwrap(), x)[0];
            (y, y.abs())
        }
        Architecture::Lrtfr { .. } => {
            let r = embeddings(model, x);
            let core = model.core().unwrap();
            let abs_core = DenseTensor::new(core.shape().to_vec(), core.data().iter().map(|c| c.abs()).collect()).unwrap();
            (naive_full_contract(core, &r), naive_full_contract(&abs_core, &abs(&r)))
        }
        Architecture::Tt { bonds, .. } | Architecture::Tr { bonds, .. } => {
            let mats: Vec<_> = embeddings(model, x)
                .iter()
                .enumerate()
                .map(|(i, r)| reshaped(r, bonds[i], bonds[i + 1]))
                .collect();
            let abs_mats: Vec<_> = mats.iter().map(|m| abs(m)).collect();
            let (prod, abs_prod) = (naive_chain(&mats), naive_chain(&abs_mats));
            if model.kind() == ModelKind::Tt {
                (prod[0][0], abs_prod[0][0])
            } else {
                (naive_trace(&prod), naive_trace(&abs_prod))
            }
        }
        Architecture::Plrnet { .. } => {
            let r = embeddings(model, x);
            let z: Vec<f64> = pairs(x.len())
                .zip(model.pair_cores())
                .map(|((i, j), c)| {
                    let mut s = 0.0;
                    for a in 0..c.rows() {
                        for b in 0..c.cols() {
                            s += r[i][a] * c.get(a, b) * r[j][b];
                        }
                    }
                    s
                })
                .collect();
            let y = naive_siren(model.head().unwrap(), &z)[0];
            (y, y.abs())
        }
    }
}

/// `|a − b| / max(|a|, |b|, scale)`.
pub fn scaled_rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let d = a.abs().max(b.abs()).max(scale);
    if d == 0.0 {
        0.0
    } else {
        (a - b).abs() / d
    }
}

/// Small random shape of `kind` over `n` inputs with ranks drawn from `ranks`
/// and sine frequencies up to 30.
pub fn random_spec(rng: &mut ChaCha8Rng, kind: ModelKind, n: usize, ranks: &[usize]) -> ModelSpec {
    random_spec_with_omega(rng, kind, n, ranks, 30.0)
}

pub fn random_spec_with_omega(rng: &mut ChaCha8Rng, kind: ModelKind, n: usize, ranks: &[usize], max_omega0: f64) -> ModelSpec {
    let pick = |rng: &mut ChaCha8Rng| ranks[rng.random_range(0..ranks.len())];
    let omega0 = rng.random_range(1.0..max_omega0);
    let embed = if rng.random_bool(0.5) {
        EmbedArch::new(vec![rng.random_range(3..7)], omega0)
    } else {
        EmbedArch::new(vec![rng.random_range(3..6), rng.random_range(3..6)], omega0)
    };
    let architecture = match kind {
        ModelKind::Mlp => Architecture::Mlp {
            hidden: vec![pick(rng) * 2, pick(rng) * 2],
            omega0,
        },
        ModelKind::Lrtfr => Architecture::Lrtfr {
            ranks: (0..n).map(|_| pick(rng)).collect(),
            embed,
        },
        ModelKind::Tt => {
            let mut bonds: Vec<usize> = (0..=n).map(|_| pick(rng)).collect();
            bonds[0] = 1;
            bonds[n] = 1;
            Architecture::Tt { bonds, embed }
        }
        ModelKind::Tr => {
            let mut bonds: Vec<usize> = (0..=n).map(|_| pick(rng)).collect();
            bonds[n] = bonds[0];
            Architecture::Tr { bonds, embed }
        }
        ModelKind::Plrnet => Architecture::Plrnet {
            ranks: (0..n).map(|_| pick(rng)).collect(),
            embed,
            predictor: EmbedArch::new(vec![rng.random_range(3..7)], rng.random_range(1.0..max_omega0)),
        },
    };
    ModelSpec::new(n, architecture)
}

/// Initialised model with every parameter (biases included) jittered.
pub fn random_model(rng: &mut ChaCha8Rng, spec: ModelSpec) -> SurrogateModel {
    let mut model = SurrogateModel::init(spec, rng.random()).unwrap();
    let params: Vec<f64> = model.params().iter().map(|p| p + rng.random_range(-0.02..0.02)).collect();
    model.set_params(&params).unwrap();
    model
}

/// Largest relative gap between analytic gradients and central differences.
/// The denominator is `max(|analytic|, |numeric|, floor)`.
pub fn gradient_check(model: &SurrogateModel, x: &[f64], step: f64, floor: f64) -> (f64, String) {
    let (_, tape) = model.forward(x).unwrap();
    let analytic = model.backward(&tape, 1.0).unwrap();
    let base = model.params();
    let mut probe = model.clone();
    let mut worst = (0.0, String::new());
    for k in 0..base.len() {
        let mut p = base.clone();
        p[k] = base[k] + step;
        probe.set_params(&p).unwrap();
        let up = probe.predict(x).unwrap();
        p[k] = base[k] - step;
        probe.set_params(&p).unwrap();
        let down = probe.predict(x).unwrap();
        let numeric = (up - down) / (2.0 * step);
        let err = (analytic[k] - numeric).abs() / analytic[k].abs().max(numeric.abs()).max(floor);
        if err > worst.0 {
            worst = (err, format!("{} analytic {} numeric {}", model.describe_param(k), analytic[k], numeric));
        }
    }
    worst
}

// Bessel functions by exact rational power series.

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn harmonic(n: u32) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, k| acc + BigRational::new(BigInt::one(), BigInt::from(k)))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap()
}

fn pow(q: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * q)
}

/// Series terms are added until they fall below this fraction of the
/// largest term and the index is past the argument.
const SERIES_CUTOFF: f64 = 1e-40;

/// `J_n(x) = Σ_k (−1)^k (x/2)^{2k+n} / (k! (n+k)!)`, summed exactly.
pub fn bessel_j_series(n: u32, x: f64) -> f64 {
    let half = BigRational::from_float(x).unwrap() / BigInt::from(2);
    let q = &half * &half;
    let mut term = pow(&half, n) / BigRational::from_integer(factorial(n));
    let mut sum = BigRational::zero();
    let mut biggest = 0.0f64;
    let mut k = 0u32;
    loop {
        sum += &term;
        let size = to_f64(&term.abs());
        biggest = biggest.max(size);
        if f64::from(k) > x && size < SERIES_CUTOFF * biggest {
            break;
        }
        k += 1;
        term = -term * &q / BigRational::from_integer(BigInt::from(k) * BigInt::from(n + k));
    }
    to_f64(&sum)
}

/// `Y_n(x) = (2/π)(ln(x/2) + γ) J_n(x) − A/π − B/π` with
/// `A = (x/2)^{−n} Σ_{k<n} (n−k−1)!/k! (x²/4)^k` and
/// `B = (x/2)^n Σ_k (H_k + H_{n+k}) (−x²/4)^k / (k! (n+k)!)`.
pub fn bessel_y_series(n: u32, x: f64) -> f64 {
    let half = BigRational::from_float(x).unwrap() / BigInt::from(2);
    let q = &half * &half;
    let mut a = BigRational::zero();
    for k in 0..n {
        a += BigRational::from_integer(factorial(n - k - 1)) / BigRational::from_integer(factorial(k)) * pow(&q, k);
    }
    let a = a / pow(&half, n);

    let mut b = BigRational::zero();
    let mut term = pow(&half, n) / BigRational::from_integer(factorial(n));
    let mut biggest = 0.0f64;
    let mut k = 0u32;
    loop {
        let weighted = &term * (harmonic(k) + harmonic(n + k));
        b += &weighted;
        let size = to_f64(&weighted.abs());
        biggest = biggest.max(size);
        if f64::from(k) > x && size < SERIES_CUTOFF * biggest {
            break;
        }
        k += 1;
        term = -term * &q / BigRational::from_integer(BigInt::from(k) * BigInt::from(n + k));
    }
    let pi = std::f64::consts::PI;
    let gamma = 0.577_215_664_901_532_9;
    2.0 / pi * ((x / 2.0).ln() + gamma) * bessel_j_series(n, x) - (to_f64(&a) + to_f64(&b)) / pi
}

/// Arguments and orders used by the Bessel oracle comparisons.
pub const BESSEL_POINTS: [f64; 8] = [0.37, 1.3, 2.9, 6.1, 11.7, 17.25, 23.3, 29.6];
pub const BESSEL_ORDERS: [u32; 7] = [0, 1, 2, 3, 7, 15, 30];

/// Parameter count by walking layer shapes, `Σ (fan_in · fan_out + fan_out)`.
pub fn independent_param_count(spec: &ModelSpec) -> usize {
    fn net(widths: &[usize]) -> usize {
        widths.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
    fn chain(input: usize, hidden: &[usize], output: usize) -> usize {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(output);
        net(&widths)
    }
    let n = spec.input_dim;
    match &spec.architecture {
        Architecture::Mlp { hidden, .. } => chain(n, hidden, 1),
        Architecture::Lrtfr { ranks, embed } => {
            ranks.iter().map(|&r| chain(1, &embed.hidden, r)).sum::<usize>() + ranks.iter().product::<usize>()
        }
        Architecture::Tt { bonds, embed } | Architecture::Tr { bonds, embed } => {
            bonds.windows(2).map(|b| chain(1, &embed.hidden, b[0] * b[1])).sum()
        }
        Architecture::Plrnet { ranks, embed, predictor } => {
            let mut cores = 0;
            for i in 0..n {
                for j in i + 1..n {
                    cores += ranks[i] * ranks[j];
                }
            }
            ranks.iter().map(|&r| chain(1, &embed.hidden, r)).sum::<usize>()
                + cores
                + chain(n * (n - 1) / 2, &predictor.hidden, 1)
        }
    }
}
