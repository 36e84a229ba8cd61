//! Positive real zeros of J_m and J_m'.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::raw;

/// Orders and indices below this bound are memoised.
pub const ZERO_CACHE_DIM: u32 = 65;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesselZero {
    pub m: u32,
    pub j: u32,
    /// Zero of J_m' rather than J_m.
    pub derivative: bool,
    pub value: f64,
}

type Table = Vec<OnceLock<f64>>;

fn table() -> &'static [Table; 2] {
    static CACHE: OnceLock<[Table; 2]> = OnceLock::new();
    CACHE.get_or_init(|| {
        let n = (ZERO_CACHE_DIM * ZERO_CACHE_DIM) as usize;
        [
            (0..n).map(|_| OnceLock::new()).collect(),
            (0..n).map(|_| OnceLock::new()).collect(),
        ]
    })
}

/// The `j`-th positive zero (j >= 1) of J_m, or of J_m' when `derivative` is set.
///
/// # Panics
/// If `j == 0`.
pub fn bessel_zero(m: u32, j: u32, derivative: bool) -> BesselZero {
    assert!(j >= 1, "zeros are indexed from 1");
    // J_0' = -J_1
    let value = if derivative && m == 0 {
        zero_value(1, j, false)
    } else {
        zero_value(m, j, derivative)
    };
    BesselZero { m, j, derivative, value }
}

fn zero_value(m: u32, j: u32, derivative: bool) -> f64 {
    if m < ZERO_CACHE_DIM && j < ZERO_CACHE_DIM {
        let idx = (m * ZERO_CACHE_DIM + j) as usize;
        *table()[derivative as usize][idx].get_or_init(|| locate(m, j, derivative))
    } else {
        locate(m, j, derivative)
    }
}

fn jm(m: u32, x: f64) -> f64 {
    raw::bessel_j(m, C64::new(x, 0.0)).map(|v| v.re).unwrap_or(f64::NAN)
}

fn jm_prime(m: u32, x: f64) -> f64 {
    raw::bessel_j_prime(m, C64::new(x, 0.0)).map(|v| v.re).unwrap_or(f64::NAN)
}

/// McMahon's large-zero expansion, used to seed Newton inside a verified bracket.
pub(crate) fn mcmahon(m: u32, j: u32, derivative: bool) -> f64 {
    let mu = 4.0 * (m as f64).powi(2);
    if derivative {
        let b = (j as f64 + 0.5 * m as f64 - 0.75) * PI;
        let e = 8.0 * b;
        b - (mu + 3.0) / e - 4.0 * (7.0 * mu * mu + 82.0 * mu - 9.0) / (3.0 * e.powi(3))
    } else {
        let b = (j as f64 + 0.5 * m as f64 - 0.25) * PI;
        let e = 8.0 * b;
        b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e.powi(3))
    }
}

fn locate(m: u32, j: u32, derivative: bool) -> f64 {
    let mf = m as f64;
    let f = |x: f64| if derivative { jm_prime(m, x) } else { jm(m, x) };
    let df = |x: f64| {
        if derivative {
            // J'' from Bessel's equation
            -jm_prime(m, x) / x - (1.0 - mf * mf / (x * x)) * jm(m, x)
        } else {
            jm_prime(m, x)
        }
    };

    // No zero of J_m or J_m' lies in (0, m]; zeros are spaced by more than 2.
    let step = 0.2;
    let mut a = mf.max(0.5);
    let mut fa = f(a);
    let mut count = 0;
    let (lo, hi) = loop {
        let b = a + step;
        let fb = f(b);
        if fa == 0.0 {
            count += 1;
            if count == j {
                return a;
            }
        } else if fa * fb < 0.0 {
            count += 1;
            if count == j {
                break (a, b);
            }
        }
        a = b;
        fa = fb;
    };

    let seed = mcmahon(m, j, derivative);
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let mut x = if seed > lo && seed < hi { seed } else { 0.5 * (lo + hi) };
    for _ in 0..100 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx * flo < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        let newton = x - fx / df(x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_zeros_match_tables() {
        // Abramowitz & Stegun table 9.5
        assert!((bessel_zero(0, 1, false).value - 2.404_825_557_695_773).abs() < 1e-13);
        assert!((bessel_zero(1, 1, false).value - 3.831_705_970_207_512).abs() < 1e-13);
        assert!((bessel_zero(1, 1, true).value - 1.841_183_781_340_659).abs() < 1e-13);
        assert!((bessel_zero(2, 1, true).value - 3.054_236_928_227_140).abs() < 1e-13);
        assert!((bessel_zero(0, 2, false).value - 5.520_078_110_286_311).abs() < 1e-13);
    }

    #[test]
    fn derivative_of_order_zero_is_order_one() {
        for j in 1..6 {
            assert_eq!(bessel_zero(0, j, true).value, bessel_zero(1, j, false).value);
        }
    }

    #[test]
    fn residuals_are_tiny() {
        for m in [0u32, 3, 10, 40, 64] {
            for j in [1u32, 2, 7, 30] {
                let z = bessel_zero(m, j, false).value;
                assert!(jm(m, z).abs() < 1e-12, "J_{m} at j={j}");
                let zp = bessel_zero(m, j, true).value;
                assert!(jm_prime(m, zp).abs() < 1e-12, "J_{m}' at j={j}");
            }
        }
    }

    #[test]
    fn concurrent_lookups_agree() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(|| (1..20).map(|j| bessel_zero(5, j, true).value).collect::<Vec<_>>()))
            .collect();
        let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        assert!(results.windows(2).all(|w| w[0] == w[1]));
    }
}
