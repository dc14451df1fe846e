//! Integer-order Bessel functions of real positive argument.
//!
//! `J_n` comes from Miller's downward recurrence normalized with
//! `J_0 + 2 Σ J_2k = 1`; `Y_0` and `Y_1` from Neumann series over those
//! values; higher `Y_n` from the (stable) upward recurrence.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const RESCALE_ABOVE: f64 = 1e200;

fn check_argument(x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::Domain(format!("Bessel argument must be finite and non-negative, got {x}")));
    }
    Ok(())
}

/// Normalized `J_0..=J_M(x)` for a start index `M` past both `nmax` and `x`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    let top = libm::fmax(nmax as f64, x);
    let mut m = (top + 20.0 + libm::sqrt(160.0 * top)) as usize;
    m += m % 2;
    let mut j = vec![0.0; m + 2];
    j[m] = 1.0;
    for k in (1..=m).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if libm::fabs(j[k - 1]) > RESCALE_ABOVE {
            for v in &mut j[k - 1..] {
                *v /= RESCALE_ABOVE;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    j.truncate(m + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// `J_0(x), …, J_nmax(x)`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    if x == 0.0 {
        let mut j = vec![0.0; nmax + 1];
        j[0] = 1.0;
        return Ok(j);
    }
    let mut j = miller(nmax, x);
    j.truncate(nmax + 1);
    Ok(j)
}

/// `(J_0..=J_nmax, Y_0..=Y_nmax)` at `x > 0`.
pub fn bessel_jy_all(nmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_argument(x)?;
    if x == 0.0 {
        return Err(Error::Domain("Y_n is singular at x = 0".into()));
    }
    let j = miller(nmax.max(1), x);
    let pi = core::f64::consts::PI;
    let log_term = libm::log(x / 2.0) + EULER_GAMMA;

    // Y_0 = (2/π)(ln(x/2)+γ) J_0 − (4/π) Σ_{k≥1} (−1)^k J_2k / k
    // Y_1 = (2/π)[(ln(x/2)+γ) J_1 − J_0/x + Σ_{k≥1} (−1)^k (J_{2k−1} − J_{2k+1}) / k]
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        let next = j.get(2 * k + 1).copied().unwrap_or(0.0);
        s1 += sign * (j[2 * k - 1] - next) / k as f64;
        k += 1;
    }
    let mut y = vec![0.0; nmax.max(1) + 1];
    y[0] = 2.0 / pi * log_term * j[0] - 4.0 / pi * s0;
    y[1] = 2.0 / pi * (log_term * j[1] - j[0] / x + s1);
    for n in 1..nmax {
        y[n + 1] = 2.0 * n as f64 / x * y[n] - y[n - 1];
    }
    let mut j = j;
    j.truncate(nmax + 1);
    y.truncate(nmax + 1);
    Ok((j, y))
}

pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_all(n, x)?[n])
}

pub fn bessel_y(n: usize, x: f64) -> Result<f64> {
    Ok(bessel_jy_all(n, x)?.1[n])
}
