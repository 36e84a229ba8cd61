//! Cylinder functions of integer order and complex argument.

mod raw;
mod reduced;
mod zeros;

pub use raw::{
    bessel_h1, bessel_h1_prime, bessel_i, bessel_i_prime, bessel_j, bessel_j_prime, bessel_k,
    bessel_k_prime, bessel_y, bessel_y_prime,
};
pub use reduced::{reduced, ReducedBessel, ReducedKind};
pub use zeros::{bessel_zero, BesselZero, ZERO_CACHE_DIM};

pub(crate) use reduced::{itilde_ladder, jtilde_ladder, HankelLadder, MacdonaldLadder};

/// J_m(x)/J_m''(x) at a zero x of J_m'. Real and negative; tends to -1 for large zeros.
pub fn zero_curvature_ratio(zero: &BesselZero) -> f64 {
    debug_assert!(zero.derivative);
    let x = zero.value;
    let m = zero.m as f64;
    // J'' = -J'/x - (1 - m^2/x^2) J and J' = 0 here
    -1.0 / (1.0 - m * m / (x * x))
}
