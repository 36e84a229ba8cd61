//! Resonant cavity radii: perfect-conductor ladder, good-conductor shifts,
//! camelback line shapes, numerical refinement and scaling reports.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{C, HBAR, RYDBERG_ENERGY};
use crate::error::{Error, Result};
use crate::green::QuadratureSpec;
use crate::material::{sqrt_eps, Material, Permittivity};
use crate::numerics::{bisect, golden_max};
use crate::observables::{channel_results, CavityConfig};
use crate::particle::{photon_number, rydberg_thermal_n, ParticleSpec};
use crate::specfun::{bessel_zero, reduced, zero_curvature_ratio, BesselZero, ReducedKind};

const GRID_POINTS: usize = 41;
const MAX_WIDENINGS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// TE-like, zeros of J_m'
    M,
    /// TM-like, zeros of J_m
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Potential,
    Rate,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Potential => "potential",
            Target::Rate => "rate",
        })
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potential" => Ok(Target::Potential),
            "rate" => Ok(Target::Rate),
            other => Err(Error::InvalidInput(format!("unknown target '{other}' (potential|rate)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResonanceMode {
    pub m: u32,
    pub j: u32,
    pub polarization: Polarization,
    /// The same radius also resonates with the other polarization (j_1j = j'_0j).
    pub double_resonance: bool,
}

impl ResonanceMode {
    pub fn new(m: u32, j: u32, polarization: Polarization) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidInput("zero index j starts at 1".into()));
        }
        let double_resonance = matches!((m, polarization), (1, Polarization::N) | (0, Polarization::M));
        Ok(Self { m, j, polarization, double_resonance })
    }

    pub fn zero(&self) -> BesselZero {
        bessel_zero(self.m, self.j, self.polarization == Polarization::M)
    }

    /// Partner mode sharing the radius, if any.
    pub fn partner(&self) -> Option<Self> {
        match (self.m, self.polarization) {
            (1, Polarization::N) => Self::new(0, self.j, Polarization::M).ok(),
            (0, Polarization::M) => Self::new(1, self.j, Polarization::N).ok(),
            _ => None,
        }
    }

    /// δ'/δ: 1 for N modes, -J_m/J_m'' at the zero for M modes.
    pub fn shift_ratio(&self) -> Result<f64> {
        Ok(match self.polarization {
            Polarization::N => 1.0,
            Polarization::M => -zero_curvature_ratio(&self.zero()),
        })
    }

    /// Evaluation point for the on-resonance observable: the axis when the
    /// mode reaches it, otherwise the first antinode of the mode.
    pub fn probe_fraction(&self) -> Result<f64> {
        let on_axis = matches!((self.m, self.polarization), (0, Polarization::N) | (1, Polarization::M));
        if on_axis {
            return Ok(0.0);
        }
        let zero = self.zero().value;
        let antinode = bessel_zero(self.m.max(1), 1, true).value;
        Ok((antinode / zero).min(0.9))
    }
}

impl fmt::Display for ResonanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pol = match self.polarization {
            Polarization::M => "M",
            Polarization::N => "N",
        };
        write!(f, "{},{},{}", self.m, self.j, pol)
    }
}

impl FromStr for ResonanceMode {
    type Err = Error;

    /// "m,j,N" or "m,j,M"
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("mode '{s}' is not of the form m,j,N|M"));
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let m = parts[0].parse().map_err(|_| bad())?;
        let j = parts[1].parse().map_err(|_| bad())?;
        let pol = match parts[2] {
            "N" | "n" => Polarization::N,
            "M" | "m" => Polarization::M,
            _ => return Err(bad()),
        };
        Self::new(m, j, pol)
    }
}

/// Perfect-conductor resonant radius c·zero/ω, m.
pub fn perfect_radius(mode: &ResonanceMode, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("frequency must be positive (got {omega})")));
    }
    Ok(C * mode.zero().value / omega)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticShift {
    /// Shift δ (or δ') of kR away from the Bessel zero.
    pub delta: f64,
    /// zero + δ
    pub kr: f64,
    /// false when |ε| < 100, where the expansion is not trustworthy
    pub good_conductor: bool,
}

/// Leading-order shift of the optimal kR for a good conductor.
pub fn analytic_shift(mode: &ResonanceMode, eps: Permittivity<C64>, target: Target) -> Result<AnalyticShift> {
    let zero = mode.zero().value;
    let Permittivity::Finite(eps) = eps else {
        return Ok(AnalyticShift { delta: 0.0, kr: zero, good_conductor: true });
    };
    let s = sqrt_eps(eps).inv();
    let sign = match target {
        Target::Potential => -1.0,
        Target::Rate => 1.0,
    };
    let delta = mode.shift_ratio()? * (s.im + sign * s.re / 3f64.sqrt());
    Ok(AnalyticShift { delta, kr: zero + delta, good_conductor: eps.norm() >= 100.0 })
}

/// Resonance line shape: Im sqrt(1/ζ) for the potential, Re sqrt(1/ζ) for the rate.
pub fn camelback(zeta: C64, target: Target) -> Result<f64> {
    let a = zeta.norm();
    if a == 0.0 {
        return Err(Error::Pole("camelback at zeta = 0".into()));
    }
    let pre = 1.0 / (2f64.sqrt() * a.sqrt());
    Ok(match target {
        Target::Potential => -pre * (1.0 - zeta.re / a).max(0.0).sqrt(),
        Target::Rate => pre * (1.0 + zeta.re / a).max(0.0).sqrt(),
    })
}

/// Location Re ζ of the camelback extremum for given Im ζ.
pub fn camelback_optimum(im_zeta: f64, target: Target) -> f64 {
    match target {
        Target::Potential => -im_zeta / 3f64.sqrt(),
        Target::Rate => im_zeta / 3f64.sqrt(),
    }
}

/// |camelback| at its extremum, 3^{3/4}/(2 sqrt(2 Im ζ)).
pub fn camelback_peak(im_zeta: f64) -> f64 {
    3f64.powf(0.75) / (2.0 * (2.0 * im_zeta).sqrt())
}

/// Complex root kR of the q = 0 resonance condition next to the mode's zero,
/// by Newton iteration.
pub fn resonance_root(mode: &ResonanceMode, eps: C64) -> Result<C64> {
    let s = sqrt_eps(eps);
    let m = mode.m;
    // N: J/J' = 1/(√ε h~(√ε z)); M: J'/J = h~(√ε z)/√ε. Both regular at the root.
    let f = |z: C64| -> Result<C64> {
        let jt = reduced(ReducedKind::Jtilde, m, z)?;
        let ht = reduced(ReducedKind::Htilde, m, s * z)?;
        Ok(match mode.polarization {
            Polarization::N => jt.inv() - (s * ht).inv(),
            Polarization::M => jt - ht / s,
        })
    };
    let zero = mode.zero().value;
    let mut z = C64::new(zero, 0.0) + mode.shift_ratio()? * (-C64::i() / s);
    for _ in 0..60 {
        let h = 1e-7 * z.norm();
        let fz = f(z)?;
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        let step = fz / d;
        z -= step;
        if step.norm() < 1e-15 * z.norm() {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence(format!("resonance root near {zero} did not converge")))
}

/// U^r (J) or Γ^(1) (1/s) of `state` in the given cavity.
pub fn observable(target: Target, p: &ParticleSpec, state: &str, cav: &CavityConfig, spec: &QuadratureSpec) -> Result<f64> {
    let ch = channel_results(p, state, cav, spec)?;
    Ok(match target {
        Target::Potential => ch.iter().map(|c| c.u_res).sum(),
        Target::Rate => ch.iter().map(|c| c.gamma1).sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceResult {
    pub mode: ResonanceMode,
    pub target: Target,
    pub delta: f64,
    pub r_perfect: f64,
    pub r_analytic: f64,
    pub r_refined: f64,
    /// Observable at the refined radius: J for potentials, 1/s for rates.
    pub peak_value: f64,
    /// Full width at half maximum of |observable| versus R, m.
    pub fwhm: Option<f64>,
    pub probe_rho_fraction: f64,
    pub evaluations: usize,
}

/// Dominant transition frequency and the wall permittivity there.
fn dominant(p: &ParticleSpec, state: &str, material: &Material) -> Result<(f64, Permittivity<C64>)> {
    let omega = p.dominant_channel(state)?.omega_kn.abs();
    Ok((omega, material.eps_real_freq(omega)?))
}

/// Analytic optimal radius for the particle's dominant transition, m.
pub fn analytic_radius(mode: &ResonanceMode, target: Target, p: &ParticleSpec, state: &str, material: &Material) -> Result<f64> {
    let (omega, eps) = dominant(p, state, material)?;
    Ok(C * analytic_shift(mode, eps, target)?.kr / omega)
}

/// Maximises |observable| at the mode's probe point over R around the analytic
/// estimate, then measures the peak width. Lossy walls only.
pub fn refine_radius(
    mode: &ResonanceMode,
    target: Target,
    p: &ParticleSpec,
    state: &str,
    template: &CavityConfig,
    spec: &QuadratureSpec,
) -> Result<ResonanceResult> {
    if template.material.is_perfect_conductor() {
        return Err(Error::Pole("lossless wall: the resonance is a pole at the perfect-conductor radius".into()));
    }
    let (omega, eps) = dominant(p, state, &template.material)?;
    let shift = analytic_shift(mode, eps, target)?;
    let zero = mode.zero().value;
    let r_perfect = C * zero / omega;
    let r_analytic = C * shift.kr / omega;
    let frac = mode.probe_fraction()?;
    let w = (shift.delta.abs() * C / omega).max(1e-5 * r_perfect);
    let mut evaluations = 0usize;
    let mut f = |r: f64| -> Result<f64> {
        evaluations += 1;
        let cav = CavityConfig { radius: r, rho: frac * r, ..template.clone() };
        Ok(observable(target, p, state, &cav, spec)?.abs())
    };

    let (mut lo, mut hi) = (r_analytic - 5.0 * w, r_analytic + 5.0 * w);
    let mut widenings = 0;
    let (a, b) = loop {
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..GRID_POINTS {
            let v = f(lo + i as f64 * step)?;
            if v > best.1 {
                best = (i, v);
            }
        }
        if best.0 > 0 && best.0 < GRID_POINTS - 1 {
            break (lo + (best.0 - 1) as f64 * step, lo + (best.0 + 1) as f64 * step);
        }
        if widenings == MAX_WIDENINGS {
            return Err(Error::BracketEdge(widenings));
        }
        widenings += 1;
        let centre = lo + best.0 as f64 * step;
        let half = hi - lo;
        lo = (centre - half).max(0.5 * r_perfect);
        hi = centre + half;
    };
    let (r_refined, peak_abs) = golden_max(&mut f, a, b, 1e-7 * r_perfect)?;

    let half = 0.5 * peak_abs;
    let mut edge = |dir: f64| -> Result<Option<f64>> {
        let mut inner = r_refined;
        for _ in 0..400 {
            let outer = inner + dir * 0.5 * w;
            if outer <= 0.0 {
                return Ok(None);
            }
            if f(outer)? < half {
                let (x0, x1) = if dir < 0.0 { (outer, inner) } else { (inner, outer) };
                return bisect(|r| Ok(f(r)? - half), x0, x1, 1e-4 * w).map(Some);
            }
            inner = outer;
        }
        Ok(None)
    };
    let left = edge(-1.0)?;
    let right = edge(1.0)?;
    let fwhm = left.zip(right).map(|(l, r)| r - l);

    let cav = CavityConfig { radius: r_refined, rho: frac * r_refined, ..template.clone() };
    let peak_value = observable(target, p, state, &cav, spec)?;
    Ok(ResonanceResult {
        mode: *mode,
        target,
        delta: shift.delta,
        r_perfect,
        r_analytic,
        r_refined,
        peak_value,
        fwhm,
        probe_rho_fraction: frac,
        evaluations: evaluations + 1,
    })
}

/// Observable on an even grid of ρ in [0, rho_max_fraction·R].
pub fn radial_profile(
    target: Target,
    p: &ParticleSpec,
    state: &str,
    cav: &CavityConfig,
    spec: &QuadratureSpec,
    points: usize,
    rho_max_fraction: f64,
) -> Result<Vec<(f64, f64)>> {
    if points < 2 || !(rho_max_fraction > 0.0 && rho_max_fraction < 1.0) {
        return Err(Error::InvalidInput("profile needs >= 2 points and 0 < rho_max < R".into()));
    }
    (0..points)
        .map(|i| {
            let rho = cav.radius * rho_max_fraction * i as f64 / (points - 1) as f64;
            observable(target, p, state, &cav.at_rho(rho), spec).map(|v| (rho, v))
        })
        .collect()
}

/// Prominences of the local minima of a profile sampled on ρ >= 0 and
/// mirrored to -ρ. A minimum at ρ = 0 is listed once; the outer end point is
/// never a minimum.
pub fn minima_prominences(values: &[f64]) -> Vec<(usize, f64)> {
    let n = values.len();
    if n < 3 {
        return Vec::new();
    }
    // walk away from i until the profile drops below v; mirror at ρ = 0
    let side_peak = |i: usize, step: isize| -> f64 {
        let v = values[i];
        let mut peak = v;
        let mut k = i as isize;
        loop {
            k += step;
            if k < 0 {
                k = -k;
                if step < 0 {
                    return side_peak_right(values, k as usize, v, peak);
                }
            }
            if k as usize >= n {
                return peak;
            }
            let w = values[k as usize];
            if w < v {
                return peak;
            }
            peak = peak.max(w);
        }
    };
    let mut out = Vec::new();
    for i in 0..n - 1 {
        let is_min = if i == 0 { values[0] < values[1] } else { values[i] < values[i - 1] && values[i] <= values[i + 1] };
        if is_min {
            let p = side_peak(i, -1).min(side_peak(i, 1)) - values[i];
            out.push((i, p));
        }
    }
    out
}

fn side_peak_right(values: &[f64], start: usize, v: f64, mut peak: f64) -> f64 {
    for &w in &values[start..] {
        if w < v {
            return peak;
        }
        peak = peak.max(w);
    }
    peak
}

/// Default prominence cut for [`count_local_minima`].
pub const MINIMA_REL_PROMINENCE: f64 = 0.025;

/// Number of local minima (see [`minima_prominences`]) whose prominence
/// exceeds `rel_prominence` times the largest prominence in the profile.
pub fn count_local_minima(values: &[f64], rel_prominence: f64) -> usize {
    let prom = minima_prominences(values);
    let cut = rel_prominence * prom.iter().map(|p| p.1).fold(0.0, f64::max);
    prom.iter().filter(|(_, p)| *p > cut).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sweep {
    /// |ε| values at fixed arg ε (rad), non-dispersive wall.
    EpsMagnitude { magnitudes: Vec<f64>, arg: f64 },
    /// arg ε values (rad) at fixed |ε|, non-dispersive wall.
    EpsPhase { args: Vec<f64>, magnitude: f64 },
    /// Transition frequencies (rad/s) with the template's wall material.
    Omega { omegas: Vec<f64> },
    /// Principal quantum numbers; ω = 2Ry/(ħn³), |d|² ∝ n⁴ from the reference n.
    PrincipalN { ns: Vec<f64>, n_ref: f64 },
}

impl Sweep {
    fn name(&self) -> &'static str {
        match self {
            Sweep::EpsMagnitude { .. } => "eps_magnitude",
            Sweep::EpsPhase { .. } => "eps_phase",
            Sweep::Omega { .. } => "omega",
            Sweep::PrincipalN { .. } => "principal_n",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub parameter: f64,
    pub r_refined: f64,
    pub peak_value: f64,
    /// Peak divided by the thermal bracket (n or n + 1) of the channel.
    pub peak_per_photon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub sweep: String,
    pub mode: ResonanceMode,
    pub target: Target,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of ln|peak| (per photon for ω and n sweeps) vs ln(parameter).
    pub exponent: Option<f64>,
    /// |peak| at the last grid point over the first.
    pub growth: f64,
    /// (2Ry/k_BT)^{1/3} at the template temperature
    pub n_thermal: Option<f64>,
}

fn log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && y.abs() > 0.0).map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Refined peak values across a parameter grid, with a fitted power law.
pub fn scaling_report(
    p: &ParticleSpec,
    state: &str,
    template: &CavityConfig,
    mode: &ResonanceMode,
    target: Target,
    sweep: &Sweep,
    spec: &QuadratureSpec,
) -> Result<ScalingReport> {
    let dom = p.dominant_channel(state)?;
    let omega0 = dom.omega_kn;
    let idx = p.transitions.iter().position(|t| std::ptr::eq(t, dom.transition)).expect("channel belongs to particle");
    let sign = omega0.signum() * if dom.transition.from == state { 1.0 } else { -1.0 };
    let d2_0 = dom.transition.dipole_sq();
    let params: Vec<f64> = match sweep {
        Sweep::EpsMagnitude { magnitudes, .. } => magnitudes.clone(),
        Sweep::EpsPhase { args, .. } => args.clone(),
        Sweep::Omega { omegas } => omegas.clone(),
        Sweep::PrincipalN { ns, .. } => ns.clone(),
    };
    if params.is_empty() {
        return Err(Error::InvalidInput("empty sweep grid".into()));
    }
    let mut rows = Vec::with_capacity(params.len());
    for &x in &params {
        let mut particle = p.clone();
        let mut cav = template.clone();
        let mut omega = omega0.abs();
        match sweep {
            Sweep::EpsMagnitude { arg, .. } => {
                cav.material = Material::fixed_at("sweep", omega, C64::from_polar(x, *arg))?;
            }
            Sweep::EpsPhase { magnitude, .. } => {
                cav.material = Material::fixed_at("sweep", omega, C64::from_polar(*magnitude, x))?;
            }
            Sweep::Omega { .. } => {
                omega = x;
                particle.transitions[idx].omega = sign * x;
            }
            Sweep::PrincipalN { n_ref, .. } => {
                omega = 2.0 * RYDBERG_ENERGY / (HBAR * x.powi(3));
                particle.transitions[idx].omega = sign * omega;
                particle.transitions[idx].dipole_sq = Some(d2_0 * (x / n_ref).powi(4));
                particle.transitions[idx].dipole_vec = None;
            }
        }
        let res = refine_radius(mode, target, &particle, state, &cav, spec)?;
        let n = photon_number(omega, cav.temperature)?;
        let bracket = if omega0 > 0.0 { n } else { n + 1.0 };
        let per_photon = if bracket > 0.0 { res.peak_value / bracket } else { f64::NAN };
        rows.push(ScalingRow { parameter: x, r_refined: res.r_refined, peak_value: res.peak_value, peak_per_photon: per_photon });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.parameter).collect();
    let exponent = match sweep {
        Sweep::EpsMagnitude { .. } => log_slope(&xs, &rows.iter().map(|r| r.peak_value).collect::<Vec<_>>()),
        Sweep::EpsPhase { .. } => None,
        Sweep::Omega { .. } | Sweep::PrincipalN { .. } => log_slope(&xs, &rows.iter().map(|r| r.peak_per_photon).collect::<Vec<_>>()),
    };
    let growth = rows.last().expect("non-empty").peak_value.abs() / rows[0].peak_value.abs();
    let n_thermal = match sweep {
        Sweep::PrincipalN { .. } if template.temperature > 0.0 => Some(rydberg_thermal_n(template.temperature)?),
        _ => None,
    };
    Ok(ScalingReport { sweep: sweep.name().into(), mode: *mode, target, rows, exponent, growth, n_thermal })
}
