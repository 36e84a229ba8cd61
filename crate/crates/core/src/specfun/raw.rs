//! Raw cylinder functions of integer order and complex argument.
//!
//! Values come from the Amos algorithm (TOMS 644) through `complex-bessel`;
//! derivatives are assembled from neighbouring orders.

use complex_bessel as amos;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

fn wrap(function: &'static str, m: u32, z: C64, r: std::result::Result<C64, amos::Error>) -> Result<C64> {
    match r {
        Ok(v) if v.re.is_finite() && v.im.is_finite() => Ok(v),
        Ok(_) | Err(amos::Error::Overflow) => Err(Error::Overflow {
            function,
            order: m,
            z: format!("{z}"),
        }),
        Err(amos::Error::InvalidInput) => Err(Error::Domain(format!("{function}({m}, {z})"))),
        Err(e) => Err(Error::NonConvergence(format!("{function}({m}, {z}): {e}"))),
    }
}

fn nonzero(function: &str, m: u32, z: C64) -> Result<()> {
    if z == C64::new(0.0, 0.0) {
        Err(Error::Domain(format!("{function}({m}, 0) is singular")))
    } else {
        Ok(())
    }
}

pub fn bessel_j(m: u32, z: C64) -> Result<C64> {
    wrap("J", m, z, amos::besselj(m as f64, z))
}

pub fn bessel_j_prime(m: u32, z: C64) -> Result<C64> {
    if m == 0 {
        return Ok(-bessel_j(1, z)?);
    }
    Ok(0.5 * (bessel_j(m - 1, z)? - bessel_j(m + 1, z)?))
}

pub fn bessel_y(m: u32, z: C64) -> Result<C64> {
    nonzero("Y", m, z)?;
    wrap("Y", m, z, amos::bessely(m as f64, z))
}

pub fn bessel_y_prime(m: u32, z: C64) -> Result<C64> {
    if m == 0 {
        return Ok(-bessel_y(1, z)?);
    }
    Ok(0.5 * (bessel_y(m - 1, z)? - bessel_y(m + 1, z)?))
}

pub fn bessel_h1(m: u32, z: C64) -> Result<C64> {
    nonzero("H1", m, z)?;
    wrap("H1", m, z, amos::hankel1(m as f64, z))
}

pub fn bessel_h1_prime(m: u32, z: C64) -> Result<C64> {
    if m == 0 {
        return Ok(-bessel_h1(1, z)?);
    }
    Ok(0.5 * (bessel_h1(m - 1, z)? - bessel_h1(m + 1, z)?))
}

pub fn bessel_i(m: u32, z: C64) -> Result<C64> {
    wrap("I", m, z, amos::besseli(m as f64, z))
}

pub fn bessel_i_prime(m: u32, z: C64) -> Result<C64> {
    if m == 0 {
        return bessel_i(1, z);
    }
    Ok(0.5 * (bessel_i(m - 1, z)? + bessel_i(m + 1, z)?))
}

pub fn bessel_k(m: u32, z: C64) -> Result<C64> {
    nonzero("K", m, z)?;
    wrap("K", m, z, amos::besselk(m as f64, z))
}

pub fn bessel_k_prime(m: u32, z: C64) -> Result<C64> {
    if m == 0 {
        return Ok(-bessel_k(1, z)?);
    }
    Ok(-0.5 * (bessel_k(m - 1, z)? + bessel_k(m + 1, z)?))
}

/// exp(-iz)·H_m^(1)(z); never overflows for the small orders used as recurrence seeds.
pub(crate) fn hankel1_scaled(m: u32, z: C64) -> Result<C64> {
    nonzero("H1", m, z)?;
    wrap("H1 (scaled)", m, z, amos::hankel1_scaled(m as f64, z))
}

/// exp(y)·K_m(y) for real y > 0.
pub(crate) fn bessel_k_scaled_real(m: u32, y: f64) -> Result<f64> {
    let z = C64::new(y, 0.0);
    nonzero("K", m, z)?;
    wrap("K (scaled)", m, z, amos::besselk_scaled(m as f64, z)).map(|v| v.re)
}
