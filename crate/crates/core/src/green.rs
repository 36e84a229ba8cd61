//! Scattering Green tensor of the cylindrical cavity at coincident points.
//!
//! By symmetry the tensor depends only on the distance ρ from the axis and is
//! diagonal in (ρ̂, φ̂, ẑ). Real-frequency integrals run along the rotated
//! contour q = s e^{-iθ}; imaginary-frequency integrals along real q.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::material::{Material, Permittivity};
use crate::mirror::{k_over_i, ln_hankel, reduced_imag, reduced_real, sqrt_upper};
use crate::numerics::{break_points, integrate, vnorm, QuadOutcome};
use crate::specfun::{itilde_ladder, jtilde_ladder, HankelLadder, MacdonaldLadder};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const TAIL_EXTENSIONS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Contour rotation angle, rad.
    pub theta: f64,
    pub rel_tol: f64,
    /// s_max = max(30, s_max_factor kR)/R, extended near the wall.
    pub s_max_factor: f64,
    pub m_max_cap: usize,
    pub matsubara_rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            theta: 0.1,
            rel_tol: 1e-8,
            s_max_factor: 10.0,
            m_max_cap: 20_000,
            matsubara_rel_tol: 1e-6,
            max_intervals: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 0.5 * PI) {
            return Err(Error::InvalidInput(format!("theta must lie in (0, pi/2), got {}", self.theta)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) || !(self.matsubara_rel_tol > 0.0 && self.matsubara_rel_tol < 1.0) {
            return Err(Error::InvalidInput("tolerances must lie in (0, 1)".into()));
        }
        if !(self.s_max_factor > 0.0) || self.m_max_cap < 2 || self.max_intervals < 1 {
            return Err(Error::InvalidInput("invalid quadrature limits".into()));
        }
        Ok(())
    }

    fn tail_length(&self, tol: f64) -> f64 {
        0.5 * (1.0 / tol).ln() + 5.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Frequency {
    Real(f64),
    Imaginary(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub m_max: usize,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub s_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenDiag {
    pub g_rr: C64,
    pub g_pp: C64,
    pub g_zz: C64,
    pub trace: C64,
    pub rho: f64,
    pub frequency: Frequency,
    pub diagnostics: Diagnostics,
}

fn check_geometry(rho: f64, radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("cavity radius must be positive (got {radius})")));
    }
    if !(rho >= 0.0 && rho < radius) {
        return Err(Error::InvalidInput(format!("need 0 <= rho < R (rho = {rho}, R = {radius})")));
    }
    Ok(())
}

fn m_estimate(abs_x: f64, rho: f64, radius: f64, tol: f64, cap: usize) -> usize {
    let geometric = (1.0 / tol).ln() / (2.0 * (radius / rho).ln());
    ((abs_x + 10.0 + geometric).ceil() as usize).clamp(4, cap)
}

struct MsumState {
    prev_small: bool,
    prev_negligible: bool,
    prev_term: f64,
    /// bound on the number of comparable terms
    span: f64,
    /// largest integrand magnitude met so far in this integral
    floor: f64,
}

impl MsumState {
    fn new(span: f64, floor: f64) -> Self {
        Self { prev_small: false, prev_negligible: false, prev_term: f64::INFINITY, span, floor }
    }

    /// True once two consecutive remainder estimates are negligible beyond the
    /// turning point, or negligible against the whole integral.
    fn step(&mut self, m: usize, abs_arg: f64, term: f64, total: f64, tol: f64) -> bool {
        // geometric tail of the remaining terms
        let r = term / self.prev_term;
        self.prev_term = term;
        let tail = if r < 1.0 { term / (1.0 - r) } else { f64::INFINITY };
        let small = tail <= tol * total;
        let negligible = term * (self.span + 10.0) <= tol * self.floor;
        let done = (small && self.prev_small && m as f64 > abs_arg + 2.0) || (negligible && self.prev_negligible);
        self.prev_small = small;
        self.prev_negligible = negligible;
        done
    }
}

struct RealIntegrand {
    k: f64,
    radius: f64,
    rho: f64,
    eps: Permittivity<C64>,
    rot: C64,
    m_tol: f64,
    m_cap: usize,
}

impl RealIntegrand {
    /// Σ_m of the three diagonal brackets at q = s e^{-iθ}, times dq/ds.
    fn eval(&self, s: f64, m_used: &mut usize, floor: f64) -> Result<[C64; 3]> {
        let q = self.rot * s;
        let k2 = self.k * self.k;
        let eta = sqrt_upper(k2 - q * q);
        let x = eta * self.radius;
        let x1 = self.eps.finite().map(|e| sqrt_upper(e * k2 - q * q) * self.radius);
        let q2k2 = q * q / k2;
        let e2k2 = eta * eta / k2;
        let kr = self.k * self.radius;
        let qr = q * self.radius;
        let mut out = if self.rho == 0.0 {
            *m_used = (*m_used).max(1);
            self.on_axis(x, x1, kr, qr, q2k2, e2k2)?
        } else {
            self.off_axis(x, x1, kr, qr, q2k2, e2k2, eta * self.rho, m_used, floor)?
        };
        for v in out.iter_mut() {
            *v *= self.rot;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Pole(format!("non-finite Green integrand at s = {s:e}")));
            }
        }
        Ok(out)
    }

    fn on_axis(&self, x: C64, x1: Option<C64>, kr: f64, qr: C64, q2k2: C64, e2k2: C64) -> Result<[C64; 3]> {
        let hx = HankelLadder::new(x, 1)?;
        let jx = jtilde_ladder(x, 1)?;
        let h1 = x1.map(|z| HankelLadder::new(z, 1)).transpose()?;
        // -H_m/J_m via the Wronskian
        let mhj = |m: usize| -(2.0 * ln_hankel(&hx, m) + (PI * x * (hx.htilde[m] - jx[m]) / (2.0 * I)).ln()).exp();
        let red = |m: usize| {
            let h1m = h1.as_ref().map_or(ZERO, |l| l.htilde[m]);
            reduced_real(m as u32, kr, qr, self.eps, x, hx.htilde[m], jx[m], x1.unwrap_or(ZERO), h1m)
        };
        let (_, rtn0) = red(0);
        let (rtm1, rtn1) = red(1);
        let side = 0.25 * mhj(1) * (rtm1 + q2k2 * rtn1);
        Ok([side, side, 0.5 * e2k2 * mhj(0) * rtn0])
    }

    #[allow(clippy::too_many_arguments)]
    fn off_axis(
        &self,
        x: C64,
        x1: Option<C64>,
        kr: f64,
        qr: C64,
        q2k2: C64,
        e2k2: C64,
        a: C64,
        m_used: &mut usize,
        floor: f64,
    ) -> Result<[C64; 3]> {
        let mut mm = m_estimate(x.norm(), self.rho, self.radius, self.m_tol, self.m_cap);
        loop {
            let hx = HankelLadder::new(x, mm)?;
            let jx = jtilde_ladder(x, mm)?;
            let ha = HankelLadder::new(a, mm)?;
            let ja = jtilde_ladder(a, mm)?;
            let h1 = x1.map(|z| HankelLadder::new(z, mm)).transpose()?;
            let x1v = x1.unwrap_or(ZERO);
            let mut acc = [ZERO; 3];
            let mut ln_e = hx.ln_h0 - ha.ln_h0;
            let mut state = MsumState::new(x.norm(), floor);
            for m in 0..=mm {
                if m > 0 {
                    ln_e += hx.ratio[m - 1].ln() - ha.ratio[m - 1].ln();
                }
                let (ht, jt, hat, jat) = (hx.htilde[m], jx[m], ha.htilde[m], ja[m]);
                // -H(x) J(a)^2 / J(x)
                let ln_b = 2.0 * ln_e + (x * (ht - jt)).ln() - 2.0 * (a * (hat - jat)).ln();
                let b = -(2.0 * I / PI) * ln_b.exp();
                let bm = if m == 0 { ZERO } else { b * (m as f64 / a).powi(2) };
                let bd = b * jat * jat;
                let h1m = h1.as_ref().map_or(ZERO, |l| l.htilde[m]);
                let (rtm, rtn) = reduced_real(m as u32, kr, qr, self.eps, x, ht, jt, x1v, h1m);
                let w = if m == 0 { 0.5 } else { 1.0 };
                let term = [
                    w * (bm * rtm + q2k2 * bd * rtn),
                    w * (bd * rtm + q2k2 * bm * rtn),
                    w * e2k2 * b * rtn,
                ];
                for n in 0..3 {
                    acc[n] += term[n];
                }
                if state.step(m, a.norm(), vnorm(&term), vnorm(&acc), self.m_tol) {
                    *m_used = (*m_used).max(m);
                    return Ok(acc);
                }
            }
            if mm >= self.m_cap {
                return Err(Error::NonConvergence(format!(
                    "mode sum not converged at m_max cap {} (|x| = {:.3e})",
                    self.m_cap,
                    x.norm()
                )));
            }
            mm = (2 * mm).min(self.m_cap);
        }
    }
}

struct ImagIntegrand {
    kappa: f64,
    radius: f64,
    rho: f64,
    eps: Permittivity<f64>,
    m_tol: f64,
    m_cap: usize,
}

impl ImagIntegrand {
    fn eval(&self, q: f64, m_used: &mut usize, floor: f64) -> Result<[f64; 3]> {
        let kap2 = self.kappa * self.kappa;
        let zeta = (kap2 + q * q).sqrt();
        let y = zeta * self.radius;
        let y1 = self.eps.finite().map(|e| (e * kap2 + q * q).sqrt() * self.radius);
        let q2 = q * q / kap2;
        let z2 = zeta * zeta / kap2;
        let kr = self.kappa * self.radius;
        let qr = q * self.radius;
        let y1v = y1.unwrap_or(0.0);
        if self.rho == 0.0 {
            *m_used = (*m_used).max(1);
            let ky = MacdonaldLadder::new(y, 1)?;
            let iy = itilde_ladder(y, 1)?;
            let k1 = y1.map(|v| MacdonaldLadder::new(v, 1)).transpose()?;
            let red = |m: usize| {
                let k1m = k1.as_ref().map_or(0.0, |l| l.ktilde[m]);
                reduced_imag(m as u32, kr, qr, self.eps, y, ky.ktilde[m], iy[m], y1v, k1m)
            };
            let (_, rtn0) = red(0);
            let (rtm1, rtn1) = red(1);
            let side = 0.25 * k_over_i(&ky, 1, y, iy[1]) * (rtm1 - q2 * rtn1);
            return Ok([side, side, -0.5 * z2 * k_over_i(&ky, 0, y, iy[0]) * rtn0]);
        }
        let b = zeta * self.rho;
        let mut mm = m_estimate(y, self.rho, self.radius, self.m_tol, self.m_cap);
        loop {
            let ky = MacdonaldLadder::new(y, mm)?;
            let iy = itilde_ladder(y, mm)?;
            let kb = MacdonaldLadder::new(b, mm)?;
            let ib = itilde_ladder(b, mm)?;
            let k1 = y1.map(|v| MacdonaldLadder::new(v, mm)).transpose()?;
            let mut acc = [0.0; 3];
            let mut ln_e = ky.ln_k0 - kb.ln_k0;
            let mut state = MsumState::new(y, floor);
            for m in 0..=mm {
                if m > 0 {
                    ln_e += ky.ratio[m - 1].ln() - kb.ratio[m - 1].ln();
                }
                // K(y) I(b)^2 / I(y)
                let ln_b = 2.0 * ln_e + (y * (iy[m] - ky.ktilde[m])).ln() - 2.0 * (b * (ib[m] - kb.ktilde[m])).ln();
                let base = ln_b.exp();
                let bm = if m == 0 { 0.0 } else { base * (m as f64 / b).powi(2) };
                let bd = base * ib[m] * ib[m];
                let k1m = k1.as_ref().map_or(0.0, |l| l.ktilde[m]);
                let (rtm, rtn) = reduced_imag(m as u32, kr, qr, self.eps, y, ky.ktilde[m], iy[m], y1v, k1m);
                let w = if m == 0 { 0.5 } else { 1.0 };
                let term = [w * (bm * rtm - q2 * bd * rtn), w * (bd * rtm - q2 * bm * rtn), -w * z2 * base * rtn];
                for n in 0..3 {
                    acc[n] += term[n];
                }
                let tn: f64 = term.iter().map(|v| v.abs()).sum();
                let an: f64 = acc.iter().map(|v| v.abs()).sum();
                if state.step(m, b, tn, an, self.m_tol) {
                    *m_used = (*m_used).max(m);
                    return Ok(acc);
                }
            }
            if mm >= self.m_cap {
                return Err(Error::NonConvergence(format!("mode sum not converged at m_max cap {} (y = {y:.3e})", self.m_cap)));
            }
            mm = (2 * mm).min(self.m_cap);
        }
    }
}

/// Integrates over [0, end] with break points at multiples of `scale`, then
/// doubles the range while the integrand at the end is not negligible.
///
/// The integrand also receives the largest magnitude it has returned so far.
fn integrate_tail<const N: usize, F>(
    mut g: F,
    scale: f64,
    end: f64,
    tol: f64,
    max_intervals: usize,
) -> Result<(QuadOutcome<N>, f64)>
where
    F: FnMut(f64, f64) -> Result<[C64; N]>,
{
    let mut floor: f64 = 0.0;
    let mut f = |x: f64| {
        let v = g(x, floor)?;
        floor = floor.max(vnorm(&v));
        Ok(v)
    };
    let mut out = integrate(&mut f, &break_points(scale, end), tol, 1e-300, max_intervals)?;
    let mut end = end;
    for _ in 0..TAIL_EXTENSIONS {
        let at_end = vnorm(&f(end)?);
        if at_end <= tol * out.peak {
            break;
        }
        let more = integrate(&mut f, &[end, 2.0 * end], tol, 1e-300, max_intervals)?;
        for n in 0..N {
            out.value[n] += more.value[n];
        }
        out.error += more.error;
        out.evaluations += more.evaluations + 1;
        out.peak = out.peak.max(more.peak);
        end *= 2.0;
    }
    Ok((out, end))
}

fn real_setup(rho: f64, omega: f64, radius: f64, mat: &Material, spec: &QuadratureSpec, tol: f64) -> Result<(RealIntegrand, f64)> {
    spec.validate()?;
    check_geometry(rho, radius)?;
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive (got {omega})")));
    }
    let eps = mat.eps_real_freq(omega)?;
    let k = omega / C;
    let s_max = ((30f64).max(spec.s_max_factor * k * radius) / radius).max(spec.tail_length(tol) / (radius - rho));
    let f = RealIntegrand { k, radius, rho, eps, rot: C64::from_polar(1.0, -spec.theta), m_tol: 0.1 * tol, m_cap: spec.m_max_cap };
    Ok((f, s_max))
}

/// Diagonal components of the scattering Green tensor at real frequency.
pub fn green_diag_real(rho: f64, omega: f64, radius: f64, mat: &Material, spec: &QuadratureSpec) -> Result<GreenDiag> {
    let (f, s_max) = real_setup(rho, omega, radius, mat, spec, spec.rel_tol)?;
    let mut m_used = 0;
    let (out, end) = integrate_tail(|s, fl| f.eval(s, &mut m_used, fl), f.k, s_max, spec.rel_tol, spec.max_intervals)?;
    let pre = I / (2.0 * PI);
    let [g_rr, g_pp, g_zz] = out.value.map(|v| pre * v);
    Ok(GreenDiag {
        g_rr,
        g_pp,
        g_zz,
        trace: g_rr + g_pp + g_zz,
        rho,
        frequency: Frequency::Real(omega),
        diagnostics: Diagnostics { m_max: m_used, error_estimate: out.error / (2.0 * PI), evaluations: out.evaluations, s_max: end },
    })
}

/// Trace of the scattering Green tensor at real frequency, 1/m.
pub fn green_trace_real(rho: f64, omega: f64, radius: f64, mat: &Material, spec: &QuadratureSpec) -> Result<C64> {
    green_trace_real_diag(rho, omega, radius, mat, spec).map(|(t, _)| t)
}

/// Trace with quadrature diagnostics.
pub fn green_trace_real_diag(
    rho: f64,
    omega: f64,
    radius: f64,
    mat: &Material,
    spec: &QuadratureSpec,
) -> Result<(C64, Diagnostics)> {
    let (f, s_max) = real_setup(rho, omega, radius, mat, spec, spec.rel_tol)?;
    let mut m_used = 0;
    let (out, end) = integrate_tail(
        |s, fl| f.eval(s, &mut m_used, fl).map(|v| [v[0] + v[1] + v[2]]),
        f.k,
        s_max,
        spec.rel_tol,
        spec.max_intervals,
    )?;
    let diag = Diagnostics { m_max: m_used, error_estimate: out.error / (2.0 * PI), evaluations: out.evaluations, s_max: end };
    Ok((I / (2.0 * PI) * out.value[0], diag))
}

fn imag_setup(rho: f64, xi: f64, radius: f64, mat: &Material, spec: &QuadratureSpec, tol: f64) -> Result<(ImagIntegrand, f64)> {
    spec.validate()?;
    check_geometry(rho, radius)?;
    if !(xi > 0.0) {
        return Err(Error::InvalidInput(format!("imaginary frequency must be positive (got {xi})")));
    }
    let eps = mat.eps_imag_freq(xi)?;
    let q_max = (30.0 / radius).max(spec.tail_length(tol) / (radius - rho));
    Ok((ImagIntegrand { kappa: xi / C, radius, rho, eps, m_tol: 0.01 * tol, m_cap: spec.m_max_cap }, q_max))
}

/// Diagonal components at imaginary frequency ω = iξ; all components are real.
pub fn green_diag_imag(rho: f64, xi: f64, radius: f64, mat: &Material, spec: &QuadratureSpec) -> Result<GreenDiag> {
    let (f, q_max) = imag_setup(rho, xi, radius, mat, spec, spec.rel_tol)?;
    let mut m_used = 0;
    let scale = f.kappa.max(1.0 / radius);
    let (out, end) = integrate_tail(
        |q, fl| f.eval(q, &mut m_used, fl).map(|v| v.map(|c| C64::new(c, 0.0))),
        scale,
        q_max,
        spec.rel_tol,
        spec.max_intervals,
    )?;
    let pre = 1.0 / (PI * PI);
    let [g_rr, g_pp, g_zz] = out.value.map(|v| C64::new(pre * v.re, 0.0));
    Ok(GreenDiag {
        g_rr,
        g_pp,
        g_zz,
        trace: g_rr + g_pp + g_zz,
        rho,
        frequency: Frequency::Imaginary(xi),
        diagnostics: Diagnostics { m_max: m_used, error_estimate: pre * out.error, evaluations: out.evaluations, s_max: end },
    })
}

/// Trace at imaginary frequency to `spec.matsubara_rel_tol`, 1/m.
pub fn green_trace_imag(rho: f64, xi: f64, radius: f64, mat: &Material, spec: &QuadratureSpec) -> Result<f64> {
    let tol = spec.matsubara_rel_tol;
    let (f, q_max) = imag_setup(rho, xi, radius, mat, spec, tol)?;
    let mut m_used = 0;
    let scale = f.kappa.max(1.0 / radius);
    let (out, _) = integrate_tail(
        |q, fl| f.eval(q, &mut m_used, fl).map(|v| [C64::new(v[0] + v[1] + v[2], 0.0)]),
        scale,
        q_max,
        tol,
        spec.max_intervals,
    )?;
    Ok(out.value[0].re / (PI * PI))
}

/// Trace of the scattering Green tensor at distance z above a planar
/// half-space, 1/m. Validation reference for the near-wall cavity field.
pub fn halfspace_trace_oracle(z: f64, omega: f64, mat: &Material) -> Result<C64> {
    if !(z > 0.0) || !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("need z > 0 and omega > 0 (z = {z}, omega = {omega})")));
    }
    let tol: f64 = 1e-10;
    let k = omega / C;
    let k2 = k * k;
    let eps = mat.eps_real_freq(omega)?;
    let rot = C64::from_polar(1.0, -0.1);
    let f = |s: f64, _: f64| -> Result<[C64; 1]> {
        let kp = rot * s;
        let kz = sqrt_upper(k2 - kp * kp);
        let (rs, rp) = match eps {
            Permittivity::PerfectConductor => (C64::new(-1.0, 0.0), C64::new(1.0, 0.0)),
            Permittivity::Finite(e) => {
                let kz1 = sqrt_upper(e * k2 - kp * kp);
                ((kz - kz1) / (kz + kz1), (e * kz - kz1) / (e * kz + kz1))
            }
        };
        let v = rot * kp / kz * (2.0 * I * kz * z).exp() * (rs + rp * (kp * kp - kz * kz) / k2);
        Ok([v])
    };
    let end = k + (0.5 * (1.0 / tol).ln() + 8.0) / z;
    let (out, _) = integrate_tail(f, k, end, tol, 4000)?;
    Ok(I / (4.0 * PI) * out.value[0])
}

/// Half-space trace at imaginary frequency ξ (real), 1/m.
pub fn halfspace_trace_imag(z: f64, xi: f64, mat: &Material) -> Result<f64> {
    if !(z > 0.0) || !(xi > 0.0) {
        return Err(Error::InvalidInput(format!("need z > 0 and xi > 0 (z = {z}, xi = {xi})")));
    }
    let tol: f64 = 1e-10;
    let kap = xi / C;
    let k2 = kap * kap;
    let eps = mat.eps_imag_freq(xi)?;
    let f = |kp: f64, _: f64| -> Result<[C64; 1]> {
        let kz = (k2 + kp * kp).sqrt();
        let (rs, rp) = match eps {
            Permittivity::PerfectConductor => (-1.0, 1.0),
            Permittivity::Finite(e) => {
                let kz1 = (e * k2 + kp * kp).sqrt();
                ((kz - kz1) / (kz + kz1), (e * kz - kz1) / (e * kz + kz1))
            }
        };
        Ok([C64::new(kp / kz * (-2.0 * kz * z).exp() * (rs - rp * (kp * kp + kz * kz) / k2), 0.0)])
    };
    let end = (0.5 * (1.0 / tol).ln() + 8.0) / z;
    let (out, _) = integrate_tail(f, kap.max(1.0 / z), end, tol, 4000)?;
    Ok(out.value[0].re / (4.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_zero;

    const RB_OMEGA: f64 = 9.013e11;

    fn pc() -> Material {
        Material::perfect_conductor()
    }

    fn fast() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-9, ..Default::default() }
    }

    #[test]
    fn trace_equals_sum_of_components() {
        let au = Material::gold();
        let k = RB_OMEGA / C;
        for (rho_frac, kr) in [(0.0, 2.0), (0.3, 2.9), (0.8, 4.1)] {
            let radius = kr / k;
            let d = green_diag_real(rho_frac * radius, RB_OMEGA, radius, &au, &fast()).unwrap();
            let t = green_trace_real(rho_frac * radius, RB_OMEGA, radius, &au, &fast()).unwrap();
            assert!((d.trace - (d.g_rr + d.g_pp + d.g_zz)).norm() <= 1e-12 * d.trace.norm());
            assert!((t - d.trace).norm() < 1e-7 * t.norm(), "{t} vs {}", d.trace);
        }
    }

    #[test]
    fn on_axis_components_coincide() {
        let d = green_diag_real(0.0, RB_OMEGA, 2.0 * C / RB_OMEGA, &Material::gold(), &fast()).unwrap();
        assert_eq!(d.g_rr, d.g_pp);
    }

    #[test]
    fn near_axis_continuity() {
        let au = Material::gold();
        let radius = 2.2 * C / RB_OMEGA;
        let t0 = green_trace_real(0.0, RB_OMEGA, radius, &au, &fast()).unwrap();
        let t1 = green_trace_real(1e-6 * radius, RB_OMEGA, radius, &au, &fast()).unwrap();
        assert!((t0 - t1).norm() < 1e-6 * t0.norm(), "{t0} {t1}");
    }

    #[test]
    fn contour_angle_invariance() {
        let au = Material::gold();
        let radius = 2.7 * C / RB_OMEGA;
        let base = green_trace_real(0.4 * radius, RB_OMEGA, radius, &au, &fast()).unwrap();
        for theta in [0.05, 0.15, 0.2] {
            let spec = QuadratureSpec { theta, ..fast() };
            let t = green_trace_real(0.4 * radius, RB_OMEGA, radius, &au, &spec).unwrap();
            assert!((t - base).norm() < 1e-6 * base.norm(), "theta {theta}: {t} vs {base}");
        }
    }

    #[test]
    fn perfect_conductor_sign_change_across_first_tm_resonance() {
        let j01 = bessel_zero(0, 1, false).value;
        let k = RB_OMEGA / C;
        let below = green_trace_real(0.0, RB_OMEGA, 0.95 * j01 / k, &pc(), &fast()).unwrap();
        let above = green_trace_real(0.0, RB_OMEGA, 1.05 * j01 / k, &pc(), &fast()).unwrap();
        assert!(below.re * above.re < 0.0, "{below} {above}");
    }

    #[test]
    fn imaginary_frequency_is_real_and_attractive() {
        let radius = 1e-4;
        let xi = 0.1 * C / radius;
        let d = green_diag_imag(0.0, xi, radius, &pc(), &fast()).unwrap();
        assert_eq!(d.trace.im, 0.0);
        assert!(d.trace.re < 0.0);
        let far = green_diag_imag(0.0, 50.0 * C / radius, radius, &pc(), &fast()).unwrap();
        let one = green_diag_imag(0.0, C / radius, radius, &pc(), &fast()).unwrap();
        assert!(far.trace.norm() < 1e-6 * one.trace.norm());
    }

    #[test]
    fn imaginary_trace_matches_components() {
        let au = Material::gold();
        let radius = 1e-4;
        let d = green_diag_imag(0.6 * radius, 3e12, radius, &au, &fast()).unwrap();
        let t = green_trace_imag(0.6 * radius, 3e12, radius, &au, &fast()).unwrap();
        assert!((t - d.trace.re).abs() < 1e-5 * t.abs());
    }

    #[test]
    fn halfspace_perfect_conductor_near_field() {
        let k = RB_OMEGA / C;
        let z = 1e-3 / k;
        let t = halfspace_trace_oracle(z, RB_OMEGA, &pc()).unwrap();
        let nf = 1.0 / (8.0 * PI * k * k * z.powi(3));
        assert!((t.re - nf).abs() < 1e-4 * nf);
        let ti = halfspace_trace_imag(z, RB_OMEGA, &pc()).unwrap();
        assert!((ti + nf).abs() < 1e-4 * nf);
    }

    #[test]
    fn halfspace_standing_wave_period() {
        let k = RB_OMEGA / C;
        let z0 = 20.0 / k;
        let a = halfspace_trace_oracle(z0, RB_OMEGA, &pc()).unwrap();
        let b = halfspace_trace_oracle(z0 + PI / k, RB_OMEGA, &pc()).unwrap();
        // 1/z envelope over one period
        assert!((a.re * z0 - b.re * (z0 + PI / k)).abs() < 0.05 * (a.re * z0).abs());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(matches!(green_trace_real(1.0, RB_OMEGA, 1.0, &pc(), &fast()), Err(Error::InvalidInput(_))));
        let spec = QuadratureSpec { theta: 2.0, ..fast() };
        assert!(green_trace_real(0.0, RB_OMEGA, 1.0, &pc(), &spec).is_err());
    }
}
