//! Reflection coefficients of the cylindrical cavity wall for the TE-like (M)
//! and TM-like (N) cylindrical modes.
//!
//! Everything is assembled from logarithmic derivatives; the raw Hankel/Bessel
//! prefactor is carried in log form and only exponentiated at the end.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::constants::C;
use crate::error::{Error, Result};
use crate::material::{sqrt_eps, Permittivity};
use crate::specfun::{jtilde_ladder, HankelLadder, MacdonaldLadder};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// sqrt(w2) on the branch with Im >= 0.
pub(crate) fn sqrt_upper(w2: C64) -> C64 {
    let mut r = w2.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && w2.im == 0.0 && w2.re < 0.0) {
        r = -r;
        if r.im == 0.0 {
            r = C64::new(0.0, r.re.abs());
        }
    }
    r
}

/// One cylindrical mode at real frequency.
#[derive(Debug, Clone, Copy)]
pub struct MirrorInput {
    pub m: u32,
    /// rad/s
    pub omega: f64,
    /// Axial wavenumber, 1/m.
    pub q: C64,
    /// Cavity radius, m.
    pub radius: f64,
    pub eps: Permittivity<C64>,
}

impl MirrorInput {
    pub fn k(&self) -> f64 {
        self.omega / C
    }

    pub fn eta(&self) -> C64 {
        sqrt_upper(self.k() * self.k() - self.q * self.q)
    }

    pub fn eta1(&self) -> Option<C64> {
        let k = self.k();
        self.eps.finite().map(|e| sqrt_upper(e * k * k - self.q * self.q))
    }

    pub fn x(&self) -> C64 {
        self.eta() * self.radius
    }

    pub fn x1(&self) -> Option<C64> {
        self.eta1().map(|e| e * self.radius)
    }
}

/// One cylindrical mode at imaginary frequency ω = iξ, real axial wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct MirrorInputImag {
    pub m: u32,
    pub xi: f64,
    pub q: f64,
    pub radius: f64,
    pub eps: Permittivity<f64>,
}

impl MirrorInputImag {
    pub fn kappa(&self) -> f64 {
        self.xi / C
    }

    /// y = ζR with ζ = sqrt(ξ²/c² + q²)
    pub fn y(&self) -> f64 {
        self.kappa().hypot(self.q) * self.radius
    }

    pub fn y1(&self) -> Option<f64> {
        let kap = self.kappa();
        self.eps.finite().map(|e| (e * kap * kap + self.q * self.q).sqrt() * self.radius)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPair {
    pub r_m: C64,
    pub r_n: C64,
    pub rt_m: C64,
    pub rt_n: C64,
}

/// Reduced coefficients (r~_M, r~_N) at real frequency.
///
/// `kr`, `qr` are kR and qR; `h`, `j` are h~_m(x), j~_m(x); `h1` is h~_m(x1).
/// The common factor x1²x² of the B coefficients has been divided out of A.
#[allow(clippy::too_many_arguments)]
pub(crate) fn reduced_real(
    m: u32,
    kr: f64,
    qr: C64,
    eps: Permittivity<C64>,
    x: C64,
    h: C64,
    j: C64,
    x1: C64,
    h1: C64,
) -> (C64, C64) {
    let eps = match eps {
        Permittivity::PerfectConductor => return (h / j, C64::new(1.0, 0.0)),
        Permittivity::Finite(e) => e,
    };
    let mf = m as f64;
    let a = if m == 0 {
        C64::new(0.0, 0.0)
    } else {
        let em1 = eps - 1.0;
        -(mf * mf) * kr * kr * qr * qr * em1 * em1 / (x1 * x1 * x * x)
    };
    let xx1 = x1 * x;
    let lead = eps * h1 * h1 * x * x;
    let tail = h * j * x1 * x1;
    let b_m = lead - (h1 * j + eps * h1 * h) * xx1 + tail;
    let b_n = lead - (eps * h1 * j + h1 * h) * xx1 + tail;
    let b_d = lead - (eps + 1.0) * h1 * j * xx1 + j * j * x1 * x1;
    let den = a + b_d;
    ((a + b_m) / den, (a + b_n) / den)
}

/// Reduced coefficients at imaginary frequency; `k`, `i` are k~_m(y), i~_m(y) and
/// `k1` is k~_m(y1). `kap_r` = ξR/c.
#[allow(clippy::too_many_arguments)]
pub(crate) fn reduced_imag(
    m: u32,
    kap_r: f64,
    qr: f64,
    eps: Permittivity<f64>,
    y: f64,
    k: f64,
    i: f64,
    y1: f64,
    k1: f64,
) -> (f64, f64) {
    let eps = match eps {
        Permittivity::PerfectConductor => return (k / i, 1.0),
        Permittivity::Finite(e) => e,
    };
    let mf = m as f64;
    let a = if m == 0 {
        0.0
    } else {
        let em1 = eps - 1.0;
        mf * mf * kap_r * kap_r * qr * qr * em1 * em1 / (y1 * y1 * y * y)
    };
    let yy1 = y1 * y;
    let lead = eps * k1 * k1 * y * y;
    let tail = k * i * y1 * y1;
    let b_m = lead - (k1 * i + eps * k1 * k) * yy1 + tail;
    let b_n = lead - (eps * k1 * i + k1 * k) * yy1 + tail;
    let b_d = lead - (eps + 1.0) * k1 * i * yy1 + i * i * y1 * y1;
    let den = a + b_d;
    ((a + b_m) / den, (a + b_n) / den)
}

/// ln H_m(x) from a Hankel ladder.
pub(crate) fn ln_hankel(lad: &HankelLadder, m: usize) -> C64 {
    lad.ratio[..m].iter().fold(lad.ln_h0, |acc, t| acc + t.ln())
}

pub fn reflection_real_freq(inp: &MirrorInput) -> Result<ReflectionPair> {
    let m = inp.m as usize;
    let x = inp.x();
    if x.norm() == 0.0 {
        return Err(Error::Pole(format!("eta = 0 (q = k) for m = {m}")));
    }
    let jt = jtilde_ladder(x, m)?[m];
    let hl = HankelLadder::new(x, m)?;
    let ht = hl.htilde[m];
    if (m as f64 / x - jt).norm() > 1e12 {
        return Err(Error::Pole(format!("J_{m}(x) = 0 at x = {x}")));
    }
    let (x1, h1) = match inp.x1() {
        Some(x1) => (x1, HankelLadder::new(x1, m)?.htilde[m]),
        None => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
    };
    let kr = inp.k() * inp.radius;
    let qr = inp.q * inp.radius;
    let (rt_m, rt_n) = reduced_real(inp.m, kr, qr, inp.eps, x, ht, jt, x1, h1);
    // -H/J = -H^2 * pi x (h~ - j~) / (2i)
    let ln_pref = 2.0 * ln_hankel(&hl, m) + (PI * x * (ht - jt) / (2.0 * I)).ln();
    let pref = -ln_pref.exp();
    let out = ReflectionPair { r_m: pref * rt_m, r_n: pref * rt_n, rt_m, rt_n };
    let finite = |c: C64| c.re.is_finite() && c.im.is_finite();
    if !(finite(out.r_m) && finite(out.r_n)) || (inp.eps.finite().is_none() && jt.norm() < 1e-12 * ht.norm()) {
        return Err(Error::Pole(format!("reflection coefficient diverges at m = {m}, x = {x}")));
    }
    Ok(out)
}

pub fn reflection_imag_freq(inp: &MirrorInputImag) -> Result<ReflectionPair> {
    if !(inp.xi > 0.0) {
        return Err(Error::InvalidInput(format!("xi must be positive (got {})", inp.xi)));
    }
    let m = inp.m as usize;
    let y = inp.y();
    let it = crate::specfun::itilde_ladder(y, m)?[m];
    let kl = MacdonaldLadder::new(y, m)?;
    let kt = kl.ktilde[m];
    let (y1, k1) = match inp.y1() {
        Some(y1) => (y1, MacdonaldLadder::new(y1, m)?.ktilde[m]),
        None => (0.0, 0.0),
    };
    let (rt_m, rt_n) = reduced_imag(inp.m, inp.kappa() * inp.radius, inp.q * inp.radius, inp.eps, y, kt, it, y1, k1);
    let pref = C64::new(0.0, 2.0 / PI * sign_m(inp.m) * k_over_i(&kl, m, y, it));
    Ok(ReflectionPair {
        r_m: pref * rt_m,
        r_n: pref * rt_n,
        rt_m: C64::new(rt_m, 0.0),
        rt_n: C64::new(rt_n, 0.0),
    })
}

fn sign_m(m: u32) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn ln_macdonald(lad: &MacdonaldLadder, m: usize) -> f64 {
    lad.ratio[..m].iter().fold(lad.ln_k0, |acc, u| acc + u.ln())
}

/// K_m(y)/I_m(y) = y K² (i~ - k~), from the Wronskian I K' - I' K = -1/y.
pub(crate) fn k_over_i(lad: &MacdonaldLadder, m: usize, y: f64, it: f64) -> f64 {
    (2.0 * ln_macdonald(lad, m) + (y * (it - lad.ktilde[m])).ln()).exp()
}

/// Left minus right side of the q = 0 resonance condition
/// h~(sqrt(ε) kR)/j~(kR) + j~(kR)/h~(sqrt(ε) kR) = sqrt(ε) + 1/sqrt(ε),
/// for complex kR.
pub fn resonance_residual(m: u32, kr: C64, eps: C64) -> Result<C64> {
    let s = sqrt_eps(eps);
    let j = jtilde_ladder(kr, m as usize)?[m as usize];
    let h = HankelLadder::new(s * kr, m as usize)?.htilde[m as usize];
    Ok(h / j + j / h - (s + s.inv()))
}

/// The B_D coefficient at q = 0 divided by ε x⁴ (so that it is O(1)).
pub fn denominator_at_normal_incidence(m: u32, kr: C64, eps: C64) -> Result<C64> {
    let s = sqrt_eps(eps);
    let x = kr;
    let x1 = s * kr;
    let j = jtilde_ladder(x, m as usize)?[m as usize];
    let h1 = HankelLadder::new(x1, m as usize)?.htilde[m as usize];
    let b_d = eps * h1 * h1 * x * x - (eps + 1.0) * h1 * j * x1 * x + j * j * x1 * x1;
    Ok(b_d / (eps * x * x * x * x))
}
