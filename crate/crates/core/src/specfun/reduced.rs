//! Logarithmic derivatives ("reduced" functions) of J, H^(1), I and K.
//!
//! These never form the raw functions, so they stay finite for the metallic
//! arguments |Im z| ~ 1e3 where J, H, I and K themselves overflow or underflow.
//! Minimal solutions (J, I) come from a continued fraction at the top order
//! followed by downward ratio recurrence; dominant solutions (H, K) from seeds at
//! orders 0 and 1 followed by upward ratio recurrence.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::raw;
use crate::error::{Error, Result};

// Complex inversion squares the modulus, so stay well above the underflow threshold.
const TINY: f64 = 1e-150;
const CF_EPS: f64 = 1e-15;
/// Above this modulus the Hankel/Macdonald seeds come from the asymptotic series.
const ASYMPTOTIC_MIN: f64 = 50.0;
/// |J_{m+1}/J_m| beyond this means z is within ~1e-12 of a zero of J_m.
const POLE_RATIO: f64 = 1e12;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducedKind {
    /// H_m^(1)'/H_m^(1)
    Htilde,
    /// J_m'/J_m
    Jtilde,
    /// I_m'/I_m
    Itilde,
    /// K_m'/K_m
    Ktilde,
}

/// A logarithmic derivative of a cylinder function, evaluated on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedBessel {
    pub kind: ReducedKind,
    pub order: u32,
    pub argument: C64,
}

impl ReducedBessel {
    pub fn eval(&self) -> Result<C64> {
        reduced(self.kind, self.order, self.argument)
    }
}

/// Logarithmic derivative of the chosen cylinder function at order `m`.
///
/// Reports [`Error::Pole`] when `z` lies within roughly 1e-12 of a zero of the
/// function in the denominator.
pub fn reduced(kind: ReducedKind, m: u32, z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite argument {z}")));
    }
    match kind {
        ReducedKind::Jtilde => jtilde_checked(m, z),
        ReducedKind::Htilde => {
            let lad = HankelLadder::new(z, m as usize)?;
            let v = lad.htilde[m as usize];
            if !(v.re.is_finite() && v.im.is_finite()) || v.norm() > POLE_RATIO * (1.0 + m as f64 / z.norm()) {
                return Err(Error::Pole(format!("H{m}(z) vanishes near z = {z}")));
            }
            Ok(v)
        }
        // I_m(z) = i^-m J_m(iz)
        ReducedKind::Itilde => Ok(I * jtilde_checked(m, I * z)?),
        // K_m(z) = (pi/2) i^(m+1) H_m(iz)
        ReducedKind::Ktilde => {
            if z.re < 0.0 {
                return Err(Error::Domain(format!("K~ requires Re z >= 0, got {z}")));
            }
            Ok(I * reduced(ReducedKind::Htilde, m, I * z)?)
        }
    }
}

fn jtilde_checked(m: u32, z: C64) -> Result<C64> {
    if z.norm() == 0.0 {
        return if m == 0 {
            Ok(C64::new(0.0, 0.0))
        } else {
            Err(Error::Pole(format!("J{m}(0) = 0")))
        };
    }
    let jt = jtilde_cf(m as usize, z)?;
    let ratio = m as f64 / z - jt;
    if !(jt.re.is_finite() && jt.im.is_finite()) || ratio.norm() > POLE_RATIO {
        return Err(Error::Pole(format!("J{m}(z) vanishes near z = {z}")));
    }
    Ok(jt)
}

/// J_nu'(z)/J_nu(z) by the modified Lentz evaluation of the ratio continued fraction.
pub(crate) fn jtilde_cf(nu: usize, z: C64) -> Result<C64> {
    let xi = z.inv();
    let xi2 = 2.0 * xi;
    let nuf = nu as f64;
    let mut h = nuf * xi;
    if h.norm() < TINY {
        h = C64::new(TINY, 0.0);
    }
    let mut b = xi2 * nuf;
    let mut d = C64::new(0.0, 0.0);
    let mut c = h;
    let cap = 200_000 + 8 * (z.norm() as usize);
    for _ in 0..cap {
        b += xi2;
        d = b - d;
        if d.norm() < TINY {
            d = C64::new(TINY, 0.0);
        }
        c = b - c.inv();
        if c.norm() < TINY {
            c = C64::new(TINY, 0.0);
        }
        d = d.inv();
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence(format!("J ratio continued fraction at order {nu}, z = {z}")))
}

/// I_nu'(y)/I_nu(y) for real y > 0.
pub(crate) fn itilde_cf(nu: usize, y: f64) -> Result<f64> {
    let xi = 1.0 / y;
    let xi2 = 2.0 * xi;
    let nuf = nu as f64;
    let mut h = (nuf * xi).max(TINY);
    let mut b = xi2 * nuf;
    let mut d = 0.0;
    let mut c = h;
    let cap = 200_000 + 8 * (y as usize);
    for _ in 0..cap {
        b += xi2;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence(format!("I ratio continued fraction at order {nu}, y = {y}")))
}

/// j~_m(z) for m = 0..=m_max.
pub(crate) fn jtilde_ladder(z: C64, m_max: usize) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); m_max + 1];
    out[m_max] = jtilde_cf(m_max, z)?;
    let zi = z.inv();
    // r = J_{m+1}/J_m
    let mut r = m_max as f64 * zi - out[m_max];
    for m in (1..=m_max).rev() {
        let mut den = 2.0 * m as f64 * zi - r;
        if den.norm() < TINY {
            den = C64::new(TINY, 0.0);
        }
        r = den.inv();
        out[m - 1] = (m - 1) as f64 * zi - r;
    }
    Ok(out)
}

/// i~_m(y) for m = 0..=m_max, real y > 0.
pub(crate) fn itilde_ladder(y: f64, m_max: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; m_max + 1];
    out[m_max] = itilde_cf(m_max, y)?;
    let yi = 1.0 / y;
    // s = I_{m+1}/I_m
    let mut s = out[m_max] - m_max as f64 * yi;
    for m in (1..=m_max).rev() {
        s = 1.0 / (2.0 * m as f64 * yi + s);
        out[m - 1] = s + (m - 1) as f64 * yi;
    }
    Ok(out)
}

/// sum_k i^k a_k(nu) / z^k, the Hankel asymptotic series.
fn hankel_series(nu: u32, z: C64) -> C64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let w = I / z;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= w * ((mu - odd * odd) / (8.0 * k as f64));
        let t = term.norm();
        if t > prev {
            break;
        }
        sum += term;
        if t < 1e-17 * sum.norm() {
            break;
        }
        prev = t;
    }
    sum
}

/// sum_k a_k(nu) / y^k, the Macdonald asymptotic series.
fn macdonald_series(nu: u32, y: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut term = 1.0;
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (8.0 * k as f64 * y);
        if term.abs() > prev {
            break;
        }
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
    }
    sum
}

/// Upward ladder for H_m^(1)(z): ln H_0, successive ratios and h~_m.
#[derive(Debug, Clone)]
pub(crate) struct HankelLadder {
    pub ln_h0: C64,
    /// ratio[m] = H_{m+1}/H_m, m = 0..m_max
    pub ratio: Vec<C64>,
    pub htilde: Vec<C64>,
}

impl HankelLadder {
    pub fn new(z: C64, m_max: usize) -> Result<Self> {
        if z.norm() == 0.0 {
            return Err(Error::Domain("H1 ladder at z = 0".into()));
        }
        let (ln_h0, t0) = if z.norm() >= ASYMPTOTIC_MIN {
            let s0 = hankel_series(0, z);
            let s1 = hankel_series(1, z);
            let ln_h0 = 0.5 * (2.0 / (PI * z)).ln() + I * (z - FRAC_PI_4) + s0.ln();
            (ln_h0, -I * s1 / s0)
        } else {
            let h0 = raw::hankel1_scaled(0, z)?;
            let h1 = raw::hankel1_scaled(1, z)?;
            (h0.ln() + I * z, h1 / h0)
        };
        let zi = z.inv();
        let mut ratio = Vec::with_capacity(m_max + 1);
        let mut htilde = Vec::with_capacity(m_max + 1);
        let mut t = t0;
        for m in 0..=m_max {
            if m > 0 {
                t = 2.0 * m as f64 * zi - t.inv();
            }
            ratio.push(t);
            htilde.push(m as f64 * zi - t);
        }
        Ok(Self { ln_h0, ratio, htilde })
    }
}

/// Upward ladder for K_m(y), real y > 0.
#[derive(Debug, Clone)]
pub(crate) struct MacdonaldLadder {
    pub ln_k0: f64,
    /// ratio[m] = K_{m+1}/K_m
    pub ratio: Vec<f64>,
    pub ktilde: Vec<f64>,
}

impl MacdonaldLadder {
    pub fn new(y: f64, m_max: usize) -> Result<Self> {
        if y <= 0.0 {
            return Err(Error::Domain(format!("K ladder at y = {y}")));
        }
        let (ln_k0, u0) = if y >= ASYMPTOTIC_MIN {
            let s0 = macdonald_series(0, y);
            let s1 = macdonald_series(1, y);
            (0.5 * (FRAC_PI_2 / y).ln() - y + s0.ln(), s1 / s0)
        } else {
            let k0 = raw::bessel_k_scaled_real(0, y)?;
            let k1 = raw::bessel_k_scaled_real(1, y)?;
            (k0.ln() - y, k1 / k0)
        };
        let yi = 1.0 / y;
        let mut ratio = Vec::with_capacity(m_max + 1);
        let mut ktilde = Vec::with_capacity(m_max + 1);
        let mut u = u0;
        for m in 0..=m_max {
            if m > 0 {
                u = 1.0 / u + 2.0 * m as f64 * yi;
            }
            ratio.push(u);
            ktilde.push(m as f64 * yi - u);
        }
        Ok(Self { ln_k0, ratio, ktilde })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jtilde_small_argument_series() {
        // J0'/J0 = -z/2 - z^3/16 + ...
        let v = reduced(ReducedKind::Jtilde, 0, C64::new(0.01, 0.0)).unwrap();
        assert!((v.re + 0.005).abs() < 1e-7, "{v}");
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn htilde_tends_to_i() {
        let v = reduced(ReducedKind::Htilde, 0, C64::new(1e3, 0.0)).unwrap();
        assert!((v - I).norm() < 2e-3, "{v}");
        // -1/(2z) is the next term
        assert!((v - I + 0.5e-3).norm() < 1e-6, "{v}");
    }

    #[test]
    fn jtilde_pole_detected() {
        let j01 = 2.404_825_557_695_773;
        let r = reduced(ReducedKind::Jtilde, 0, C64::new(j01, 0.0));
        assert!(matches!(r, Err(Error::Pole(_))), "{r:?}");
    }

    #[test]
    fn ladders_agree_with_single_order_evaluations() {
        let z = C64::new(7.3, 2.1);
        let lad = jtilde_ladder(z, 30).unwrap();
        let hl = HankelLadder::new(z, 30).unwrap();
        for m in [0usize, 1, 5, 17, 30] {
            let direct = jtilde_cf(m, z).unwrap();
            assert!((lad[m] - direct).norm() < 1e-11 * direct.norm().max(1.0));
            let h = raw::bessel_h1(m as u32, z).unwrap();
            let hp = raw::bessel_h1_prime(m as u32, z).unwrap();
            assert!((hl.htilde[m] - hp / h).norm() < 1e-10 * (hp / h).norm());
        }
    }

    #[test]
    fn metallic_arguments_stay_finite() {
        // |Im z| ~ 3e3 overflows raw J and H
        let z = C64::new(2.0e3, 3.0e3);
        let j = reduced(ReducedKind::Jtilde, 3, z).unwrap();
        let h = reduced(ReducedKind::Htilde, 3, z).unwrap();
        assert!((j + I).norm() < 1e-3, "{j}");
        assert!((h - I).norm() < 1e-3, "{h}");
    }

    #[test]
    fn real_ladders_match_raw_ratios() {
        let y = 3.7;
        let il = itilde_ladder(y, 12).unwrap();
        let kl = MacdonaldLadder::new(y, 12).unwrap();
        for m in 0..=12u32 {
            let z = C64::new(y, 0.0);
            let it = raw::bessel_i_prime(m, z).unwrap() / raw::bessel_i(m, z).unwrap();
            let kt = raw::bessel_k_prime(m, z).unwrap() / raw::bessel_k(m, z).unwrap();
            assert!((il[m as usize] - it.re).abs() < 1e-12 * it.re.abs());
            assert!((kl.ktilde[m as usize] - kt.re).abs() < 1e-12 * kt.re.abs());
        }
        let k0 = raw::bessel_k(0, C64::new(y, 0.0)).unwrap().re;
        assert!((kl.ln_k0 - k0.ln()).abs() < 1e-13);
    }

    #[test]
    fn asymptotic_and_amos_seeds_agree_at_switchover() {
        let z = C64::new(ASYMPTOTIC_MIN * 1.01, 3.0);
        let lad = HankelLadder::new(z, 4).unwrap();
        let h0 = raw::bessel_h1(0, z).unwrap();
        assert!((lad.ln_h0.exp() - h0).norm() < 1e-13 * h0.norm());
        let y = ASYMPTOTIC_MIN * 1.01;
        let kl = MacdonaldLadder::new(y, 4).unwrap();
        let k1 = raw::bessel_k(1, C64::new(y, 0.0)).unwrap().re;
        let k0 = raw::bessel_k(0, C64::new(y, 0.0)).unwrap().re;
        assert!((kl.ratio[0] - k1 / k0).abs() < 1e-13);
    }
}
