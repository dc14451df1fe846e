//! Return loss of a lossless microstrip line terminated by a resistive load.
//!
//! Quasi-static line model (no dispersion), referenced to 50 Ω at the port.
//! Inputs use the benchmark units: mm, GHz, Ω.

use alloc::vec;

use num_complex::Complex64;

use super::{tabulate, ParamBox, Variable};
use crate::optim::RawData;
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const REFERENCE_IMPEDANCE: f64 = 50.0;
pub const DEFAULT_COUNT: usize = 6000;

/// `ε_eff = (ε_r+1)/2 + (ε_r−1)/2 · (1 + 12h/W)^(−1/2)`.
pub fn effective_permittivity(w_over_h: f64, eps_r: f64) -> f64 {
    (eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 / libm::sqrt(1.0 + 12.0 / w_over_h)
}

/// Characteristic impedance in Ω for a strip of the given `W/h`.
pub fn characteristic_impedance(w_over_h: f64, eps_eff: f64) -> f64 {
    let u = w_over_h;
    if u <= 1.0 {
        60.0 / libm::sqrt(eps_eff) * libm::log(8.0 / u + u / 4.0)
    } else {
        120.0 * core::f64::consts::PI / libm::sqrt(eps_eff) / (u + 1.393 + 0.667 * libm::log(u + 1.444))
    }
}

/// `Z_in = Z_0 (Z_L + j Z_0 tan βl) / (Z_0 + j Z_L tan βl)`.
pub fn input_impedance(z0: f64, z_load: f64, beta_l: f64) -> Complex64 {
    let t = libm::tan(beta_l);
    z0 * Complex64::new(z_load, z0 * t) / Complex64::new(z0, z_load * t)
}

/// Guided wavelength `c / (f √ε_eff)` in mm.
pub fn guided_wavelength_mm(w_mm: f64, h_mm: f64, eps_r: f64, f_ghz: f64) -> f64 {
    let eps_eff = effective_permittivity(w_mm / h_mm, eps_r);
    SPEED_OF_LIGHT / (f_ghz * 1e9 * libm::sqrt(eps_eff)) * 1e3
}

/// Port reflection coefficient `Γ = (Z_in − 50)/(Z_in + 50)`.
pub fn reflection_coefficient(w_mm: f64, h_mm: f64, eps_r: f64, l_mm: f64, f_ghz: f64, z_load: f64) -> Result<Complex64> {
    if !(w_mm > 0.0 && h_mm > 0.0 && eps_r >= 1.0 && l_mm >= 0.0 && f_ghz > 0.0 && z_load >= 0.0) {
        return Err(Error::Domain(alloc::format!(
            "microstrip (W={w_mm}, h={h_mm}, εr={eps_r}, L={l_mm}, f={f_ghz}, ZL={z_load})"
        )));
    }
    let u = w_mm / h_mm;
    let eps_eff = effective_permittivity(u, eps_r);
    let z0 = characteristic_impedance(u, eps_eff);
    let beta = 2.0 * core::f64::consts::PI * f_ghz * 1e9 * libm::sqrt(eps_eff) / SPEED_OF_LIGHT;
    let z_in = input_impedance(z0, z_load, beta * l_mm * 1e-3);
    Ok((z_in - REFERENCE_IMPEDANCE) / (z_in + REFERENCE_IMPEDANCE))
}

/// `RL_dB = −20 log10 |Γ|`. A perfect match has no finite return loss and is
/// reported as [`Error::SingularReturnLoss`].
pub fn microstrip_return_loss(w_mm: f64, h_mm: f64, eps_r: f64, l_mm: f64, f_ghz: f64, z_load: f64) -> Result<f64> {
    let gamma = reflection_coefficient(w_mm, h_mm, eps_r, l_mm, f_ghz, z_load)?.norm();
    if gamma == 0.0 {
        return Err(Error::SingularReturnLoss);
    }
    Ok(-20.0 * libm::log10(gamma))
}

/// Sampling ranges of the loaded-microstrip benchmark.
pub fn default_box() -> ParamBox {
    ParamBox::uniform(vec![
        Variable::new("W", "mm", 0.2, 0.5),
        Variable::new("h", "mm", 0.2, 0.5),
        Variable::new("eps_r", "", 2.2, 3.0),
        Variable::new("L", "mm", 1.0, 5.0),
        Variable::new("f", "GHz", 5.0, 7.0),
        Variable::new("Z_L", "ohm", 20.0, 22.0),
    ])
}

/// Rows `(W, h, ε_r, L, f, Z_L) ↦ RL_dB`.
pub fn dataset(pbox: &ParamBox, count: usize, seed: u64) -> Result<RawData> {
    if pbox.dim() != 6 {
        return Err(Error::dim("microstrip box variables", 6, pbox.dim()));
    }
    tabulate(pbox, count, seed, |r| microstrip_return_loss(r[0], r[1], r[2], r[3], r[4], r[5]))
}
