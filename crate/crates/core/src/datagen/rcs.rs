//! Bistatic echo width of a perfectly conducting circular cylinder under
//! TM plane-wave incidence (eigenfunction series).
//!
//! Stand-in for the elliptic-cylinder benchmark: the radius spans that
//! benchmark's semi-major axis, so `ka` covers a comparable range. The
//! incidence angle has no effect on a circle and is not an input.

use alloc::format;
use alloc::vec;

use num_complex::Complex64;

use super::bessel::bessel_jy_all;
use super::{tabulate, ParamBox, Variable};
use crate::optim::RawData;
use crate::{Error, Result};

pub use super::microstrip::SPEED_OF_LIGHT;

pub const KA_MIN: f64 = 0.1;
pub const KA_MAX: f64 = 50.0;
pub const DEFAULT_COUNT: usize = 10_000;

/// Series length `⌈ka + 10 (ka)^{1/3} + 8⌉`.
pub fn n_terms(ka: f64) -> usize {
    libm::ceil(ka + 10.0 * libm::cbrt(ka) + 8.0) as usize
}

/// Electrical size `ka` for radius in m and frequency in GHz.
pub fn electrical_size(a_m: f64, f_ghz: f64) -> f64 {
    2.0 * core::f64::consts::PI * f_ghz * 1e9 * a_m / SPEED_OF_LIGHT
}

/// Echo width in dB relative to 1 m, summing orders `0..=terms`.
pub fn cylinder_rcs_with_terms(a_m: f64, f_ghz: f64, phi_s_deg: f64, terms: usize) -> Result<f64> {
    let ka = electrical_size(a_m, f_ghz);
    if !(ka > KA_MIN && ka < KA_MAX) || !phi_s_deg.is_finite() {
        return Err(Error::Domain(format!(
            "cylinder ka = {ka} (a = {a_m} m, f = {f_ghz} GHz, φs = {phi_s_deg}°) outside ({KA_MIN}, {KA_MAX})"
        )));
    }
    let k = ka / a_m;
    let phi = phi_s_deg.to_radians();
    let (j, y) = bessel_jy_all(terms, ka)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..=terms {
        let eps = if n == 0 { 1.0 } else { 2.0 };
        let h2 = Complex64::new(j[n], -y[n]);
        sum += eps * j[n] / h2 * libm::cos(n as f64 * phi);
    }
    let sigma = 4.0 / k * sum.norm_sqr();
    Ok(10.0 * libm::log10(sigma))
}

/// Echo width in dB relative to 1 m with the default series length.
pub fn cylinder_rcs(a_m: f64, f_ghz: f64, phi_s_deg: f64) -> Result<f64> {
    let terms = n_terms(electrical_size(a_m, f_ghz));
    cylinder_rcs_with_terms(a_m, f_ghz, phi_s_deg, terms)
}

/// Radius, frequency and observation ranges of the RCS benchmark.
pub fn default_box() -> ParamBox {
    ParamBox::uniform(vec![
        Variable::new("a", "m", 2.00, 2.34),
        Variable::new("f", "GHz", 0.30, 0.52),
        Variable::new("phi_s", "deg", 0.0, 31.0),
    ])
}

/// Rows `(a, f, φ_s) ↦ σ_dB`.
pub fn dataset(pbox: &ParamBox, count: usize, seed: u64) -> Result<RawData> {
    if pbox.dim() != 3 {
        return Err(Error::dim("rcs box variables", 3, pbox.dim()));
    }
    tabulate(pbox, count, seed, |r| cylinder_rcs(r[0], r[1], r[2]))
}
