//! CODATA 2018 values in SI units.

pub const C: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const EPS0: f64 = 8.854_187_812_8e-12;
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Rydberg energy hc·R∞ in joules.
pub const RYDBERG_ENERGY: f64 = 2.179_872_361_103_5e-18;
