//! Casimir-Polder potentials and transition rates of a particle in the cavity.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{C, EPS0, HBAR, K_B, MU0};
use crate::error::{Error, Result};
use crate::green::{green_diag_real, green_trace_imag, green_trace_real, QuadratureSpec};
use crate::material::Material;
use crate::particle::{photon_number, polarizability_imag, Channel, ParticleSpec};

const ZERO_T_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct CavityConfig {
    /// Cavity radius, m.
    pub radius: f64,
    pub material: Material,
    /// K
    pub temperature: f64,
    /// Distance from the axis, m.
    pub rho: f64,
}

impl CavityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !(self.rho >= 0.0 && self.rho < self.radius) {
            return Err(Error::InvalidInput(format!("need 0 <= rho < R (rho = {}, R = {})", self.rho, self.radius)));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::InvalidInput(format!("temperature must be >= 0 (got {})", self.temperature)));
        }
        Ok(())
    }

    pub fn at_rho(&self, rho: f64) -> Self {
        Self { rho, ..self.clone() }
    }

    pub fn with_radius(&self, radius: f64) -> Self {
        Self { radius, ..self.clone() }
    }
}

/// Contribution of a single dipole channel of the chosen state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelResult {
    pub from: String,
    pub to: String,
    /// ω_kn seen from the state, rad/s.
    pub omega_kn: f64,
    pub u_res: f64,
    pub gamma0: f64,
    pub gamma1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialBreakdown {
    pub u_nonres: f64,
    pub u_res: f64,
    pub u_total: f64,
    pub per_transition: Vec<ChannelResult>,
}

impl PotentialBreakdown {
    pub fn total_hz(&self) -> f64 {
        joules_to_hz(self.u_total)
    }

    pub fn total_khz(&self) -> f64 {
        1e-3 * self.total_hz()
    }
}

pub fn joules_to_hz(u: f64) -> f64 {
    u / (2.0 * PI * HBAR)
}

/// Upward channels weighted by n, downward by -(n + 1).
fn potential_bracket(omega_kn: f64, temperature: f64) -> Result<f64> {
    let n = photon_number(omega_kn.abs(), temperature)?;
    Ok(if omega_kn > 0.0 { n } else { -(n + 1.0) })
}

/// Upward channels absorb with n, downward emit with n + 1.
fn rate_bracket(omega_kn: f64, temperature: f64) -> Result<f64> {
    let n = photon_number(omega_kn.abs(), temperature)?;
    Ok(if omega_kn > 0.0 { n } else { n + 1.0 })
}

/// d·G·d for the channel: |d|²/3 tr G for isotropic particles, otherwise the
/// diagonal contraction in (ρ, φ, z).
fn contracted_green(p: &ParticleSpec, ch: &Channel<'_>, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<C64> {
    let w = ch.omega_kn.abs();
    if p.isotropic || ch.transition.dipole_vec.is_none() {
        let tr = green_trace_real(cav.rho, w, cav.radius, &cav.material, spec)?;
        Ok(ch.transition.dipole_sq() / 3.0 * tr)
    } else {
        let g = green_diag_real(cav.rho, w, cav.radius, &cav.material, spec)?;
        let d = ch.transition.dipole_components_sq();
        Ok(d[0] * g.g_rr + d[1] * g.g_pp + d[2] * g.g_zz)
    }
}

fn channel_result(p: &ParticleSpec, ch: &Channel<'_>, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<ChannelResult> {
    let w = ch.omega_kn.abs();
    let dgd = contracted_green(p, ch, cav, spec)?;
    let d2 = ch.transition.dipole_sq();
    let rb = rate_bracket(ch.omega_kn, cav.temperature)?;
    Ok(ChannelResult {
        from: ch.transition.from.clone(),
        to: ch.transition.to.clone(),
        omega_kn: ch.omega_kn,
        u_res: MU0 * w * w * dgd.re * potential_bracket(ch.omega_kn, cav.temperature)?,
        gamma0: w.powi(3) * d2 / (3.0 * PI * EPS0 * HBAR * C.powi(3)) * rb,
        gamma1: 2.0 / (EPS0 * HBAR) * (w * w / (C * C)) * dgd.im * rb,
    })
}

/// Per-channel resonant potentials and rates of `state`.
pub fn channel_results(p: &ParticleSpec, state: &str, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<Vec<ChannelResult>> {
    cav.validate()?;
    p.channels(state)?.iter().map(|ch| channel_result(p, ch, cav, spec)).collect()
}

/// Resonant potential U^r of `state`, J.
pub fn resonant_potential(p: &ParticleSpec, state: &str, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<f64> {
    Ok(channel_results(p, state, cav, spec)?.iter().map(|c| c.u_res).sum())
}

/// Free-space rate Γ^(0), 1/s.
pub fn transition_rate_free(p: &ParticleSpec, state: &str, temperature: f64) -> Result<f64> {
    let mut sum = 0.0;
    for ch in p.channels(state)? {
        let w = ch.omega_kn.abs();
        sum += w.powi(3) * ch.transition.dipole_sq() / (3.0 * PI * EPS0 * HBAR * C.powi(3)) * rate_bracket(ch.omega_kn, temperature)?;
    }
    Ok(sum)
}

/// Cavity-induced rate Γ^(1), 1/s.
pub fn transition_rate_env(p: &ParticleSpec, state: &str, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<f64> {
    Ok(channel_results(p, state, cav, spec)?.iter().map(|c| c.gamma1).sum())
}

/// Non-resonant (Matsubara) potential U^nr of `state`, J.
///
/// The j = 0 term vanishes through the ξ² factor. At T = 0 the sum becomes an
/// integral over imaginary frequency, done by a log-grid trapezoid.
pub fn nonresonant_potential(p: &ParticleSpec, state: &str, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<f64> {
    cav.validate()?;
    let term = |xi: f64| -> Result<f64> {
        let alpha = polarizability_imag(p, state, xi)?;
        if alpha == 0.0 {
            return Ok(0.0);
        }
        Ok(xi * xi / (C * C) * alpha * green_trace_imag(cav.rho, xi, cav.radius, &cav.material, spec)?)
    };
    if cav.temperature == 0.0 {
        let w = p.dominant_channel(state)?.omega_kn.abs();
        let (lo, hi) = ((1e-4 * w).ln(), (1e4 * w).ln());
        let h = (hi - lo) / (ZERO_T_POINTS - 1) as f64;
        let mut sum = 0.0;
        for i in 0..ZERO_T_POINTS {
            let xi = (lo + i as f64 * h).exp();
            let wgt = if i == 0 || i == ZERO_T_POINTS - 1 { 0.5 } else { 1.0 };
            sum += wgt * xi * term(xi)?;
        }
        return Ok(HBAR / (2.0 * PI * EPS0) * sum * h);
    }
    let kt = K_B * cav.temperature;
    let xi1 = 2.0 * PI * kt / HBAR;
    let tol = spec.matsubara_rel_tol;
    let mut sum = 0.0;
    let mut prev: Option<f64> = None;
    let mut prev_small = false;
    for j in 1..1_000_000usize {
        let t = term(j as f64 * xi1)?;
        sum += t;
        let small = t.abs() <= tol * sum.abs();
        if small && prev_small {
            if let Some(tp) = prev {
                let r = t / tp;
                if r > 0.0 && r < 1.0 {
                    sum += t * r / (1.0 - r);
                }
            }
            return Ok(kt / EPS0 * sum);
        }
        prev_small = small;
        prev = Some(t);
    }
    Err(Error::NonConvergence("Matsubara sum".into()))
}

/// U^nr + U^r of one state with the channel breakdown.
pub fn state_potential(
    p: &ParticleSpec,
    state: &str,
    cav: &CavityConfig,
    spec: &QuadratureSpec,
    include_nonres: bool,
) -> Result<PotentialBreakdown> {
    let per_transition = channel_results(p, state, cav, spec)?;
    let u_res = per_transition.iter().map(|c| c.u_res).sum();
    let u_nonres = if include_nonres { nonresonant_potential(p, state, cav, spec)? } else { 0.0 };
    Ok(PotentialBreakdown { u_nonres, u_res, u_total: u_nonres + u_res, per_transition })
}

/// Population-weighted potential Σ_n p_n U_n, J.
pub fn total_potential(p: &ParticleSpec, cav: &CavityConfig, spec: &QuadratureSpec, include_nonres: bool) -> Result<f64> {
    p.validate()?;
    let mut terms = Vec::new();
    for s in p.states.iter().filter(|s| s.population > 0.0) {
        terms.push(s.population * state_potential(p, &s.label, cav, spec, include_nonres)?.u_total);
    }
    terms.sort_by(|a, b| a.total_cmp(b));
    Ok(terms.iter().sum())
}

/// One row of a sweep over position, radius or temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub rho: f64,
    pub radius: f64,
    pub temperature: f64,
    pub u_nonres: f64,
    pub u_res: f64,
    pub u_total: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub per_transition: Vec<ChannelResult>,
}

impl PointRecord {
    pub fn u_total_khz(&self) -> f64 {
        1e-3 * joules_to_hz(self.u_total)
    }
}

pub fn evaluate_point(
    p: &ParticleSpec,
    state: &str,
    cav: &CavityConfig,
    spec: &QuadratureSpec,
    include_nonres: bool,
) -> Result<PointRecord> {
    let b = state_potential(p, state, cav, spec, include_nonres)?;
    Ok(PointRecord {
        rho: cav.rho,
        radius: cav.radius,
        temperature: cav.temperature,
        u_nonres: b.u_nonres,
        u_res: b.u_res,
        u_total: b.u_total,
        gamma0: b.per_transition.iter().map(|c| c.gamma0).sum(),
        gamma1: b.per_transition.iter().map(|c| c.gamma1).sum(),
        per_transition: b.per_transition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particle::{State, Transition};

    fn cavity(material: Material, radius: f64, temperature: f64) -> CavityConfig {
        CavityConfig { radius, material, temperature, rho: 0.0 }
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec { rel_tol: 1e-8, ..Default::default() }
    }

    #[test]
    fn lih_free_space_lifetime() {
        let g = transition_rate_free(&ParticleSpec::lih(), "J=0", 300.0).unwrap();
        assert!((1.0 / g - 2.1).abs() < 0.05, "{}", 1.0 / g);
        assert_eq!(transition_rate_free(&ParticleSpec::lih(), "J=0", 0.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_temperature_ground_state_has_no_resonant_terms() {
        let cav = cavity(Material::gold(), 1e-3, 0.0);
        let r = channel_results(&ParticleSpec::lih(), "J=0", &cav, &spec()).unwrap();
        assert_eq!(r[0].u_res, 0.0);
        assert_eq!(r[0].gamma1, 0.0);
        assert_eq!(r[0].gamma0, 0.0);
    }

    #[test]
    fn resonant_potential_is_linear_in_dipole() {
        let cav = cavity(Material::gold(), 0.4e-3, 300.0).at_rho(0.1e-3);
        let p = ParticleSpec::rb32s_template();
        let mut q = p.clone();
        q.transitions[0].dipole_sq = Some(3.0 * p.transitions[0].dipole_sq.unwrap());
        let a = resonant_potential(&p, "32s", &cav, &spec()).unwrap();
        let b = resonant_potential(&q, "32s", &cav, &spec()).unwrap();
        assert!((b - 3.0 * a).abs() <= 1e-14 * b.abs());
    }

    #[test]
    fn anisotropic_contraction_reduces_to_trace_for_equal_components() {
        let cav = cavity(Material::gold(), 0.4e-3, 300.0).at_rho(0.2e-3);
        let d = (7.6e-53f64 / 3.0).sqrt();
        let mut p = ParticleSpec::rb32s_template();
        let iso = resonant_potential(&p, "32s", &cav, &spec()).unwrap();
        p.isotropic = false;
        p.transitions[0].dipole_sq = None;
        p.transitions[0].dipole_vec = Some([d, d, d]);
        let aniso = resonant_potential(&p, "32s", &cav, &spec()).unwrap();
        assert!((aniso - iso).abs() < 1e-7 * iso.abs());
    }

    #[test]
    fn mixture_is_population_weighted() {
        let cav = cavity(Material::gold(), 0.4e-3, 300.0).at_rho(0.1e-3);
        let base = ParticleSpec::rb32s_template();
        let s = spec();
        let u_s = total_potential(&base, &cav, &s, false).unwrap();
        let u_p = total_potential(&base.with_populations(&[("31p3/2", 1.0)]).unwrap(), &cav, &s, false).unwrap();
        let mix = total_potential(&base.with_populations(&[("32s", 0.5), ("31p3/2", 0.5)]).unwrap(), &cav, &s, false).unwrap();
        assert!((mix - 0.5 * (u_s + u_p)).abs() <= 1e-15 * mix.abs().max(u_s.abs()));
        let mut permuted = base.with_populations(&[("32s", 0.5), ("31p3/2", 0.5)]).unwrap();
        permuted.states.reverse();
        let perm = total_potential(&permuted, &cav, &s, false).unwrap();
        assert!((perm - mix).abs() <= 1e-15 * mix.abs());
    }

    #[test]
    fn nonresonant_potential_of_ground_state_in_conducting_cavity_is_attractive() {
        let p = ParticleSpec {
            name: "two-level".into(),
            isotropic: true,
            states: vec![State { label: "g".into(), population: 1.0 }, State { label: "e".into(), population: 0.0 }],
            transitions: vec![Transition::new("g", "e", 2e14, 1e-58)],
        };
        let radius = 2e-6;
        let cav = cavity(Material::perfect_conductor(), radius, 300.0).at_rho(0.5 * radius);
        let u = nonresonant_potential(&p, "g", &cav, &spec()).unwrap();
        assert!(u < 0.0, "{u}");
        let near = nonresonant_potential(&p, "g", &cav.at_rho(0.9 * radius), &spec()).unwrap();
        assert!(near < u);
        // matsubara tolerance self-consistency
        let loose = QuadratureSpec { matsubara_rel_tol: 2e-6, ..spec() };
        let u2 = nonresonant_potential(&p, "g", &cav, &loose).unwrap();
        assert!((u2 - u).abs() < 1e-5 * u.abs());
    }

    #[test]
    fn rejects_invalid_cavity() {
        let cav = cavity(Material::gold(), 1e-3, 300.0).at_rho(2e-3);
        assert!(resonant_potential(&ParticleSpec::lih(), "J=0", &cav, &spec()).is_err());
        assert!(resonant_potential(&ParticleSpec::lih(), "J=9", &cav.at_rho(0.0), &spec()).is_err());
    }
}
