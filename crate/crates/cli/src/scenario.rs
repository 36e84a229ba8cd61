use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cpcavity::green::QuadratureSpec;
use cpcavity::material::Material;
use cpcavity::observables::CavityConfig;
use cpcavity::particle::ParticleSpec;
use cpcavity::resonance::{ResonanceMode, Sweep, Target};
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetSel {
    Potential,
    Rate,
    Both,
}

impl TargetSel {
    pub fn targets(self) -> Vec<Target> {
        match self {
            TargetSel::Potential => vec![Target::Potential],
            TargetSel::Rate => vec![Target::Rate],
            TargetSel::Both => vec![Target::Potential, Target::Rate],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusChoice {
    Analytic,
    Refined,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Window edges relative to the perfect-conductor radius of the first mode, m.
    pub offset_lo_m: f64,
    pub offset_hi_m: f64,
    pub points: usize,
    /// Probe position as a fraction of R; defaults to the mode's probe point.
    pub rho_fraction: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    #[serde(default = "default_profile_points")]
    pub points: usize,
    #[serde(default = "default_rho_max")]
    pub rho_max_fraction: f64,
    #[serde(default = "default_radius_choice")]
    pub radius: RadiusChoice,
}

fn default_profile_points() -> usize {
    91
}

fn default_rho_max() -> f64 {
    0.9
}

fn default_radius_choice() -> RadiusChoice {
    RadiusChoice::Analytic
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    /// eps_magnitude | eps_phase | omega | principal_n
    pub sweep: String,
    pub values: Vec<f64>,
    /// arg ε for the |ε| sweep, rad
    pub eps_arg: Option<f64>,
    /// |ε| for the phase sweep; defaults to the wall's |ε| at the transition
    pub eps_abs: Option<f64>,
    /// reference principal quantum number of the particle file
    pub n_ref: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    particle: String,
    material: String,
    state: Option<String>,
    #[serde(rename = "temperature_K")]
    temperature: f64,
    #[serde(default = "default_target")]
    target: TargetSel,
    #[serde(default)]
    modes: Vec<String>,
    scan: Option<ScanSection>,
    profile: Option<ProfileSection>,
    scaling: Option<ScalingSection>,
    #[serde(default)]
    quadrature: QuadratureSpec,
}

fn default_target() -> TargetSel {
    TargetSel::Potential
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub particle: ParticleSpec,
    pub material: Material,
    pub state: String,
    pub temperature: f64,
    pub target: TargetSel,
    pub modes: Vec<ResonanceMode>,
    pub scan: Option<ScanSection>,
    pub profile: Option<ProfileSection>,
    pub scaling: Option<ScalingSection>,
    pub quadrature: QuadratureSpec,
}

fn resolve(base: &Path, name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn load_particle(base: &Path, name: &str) -> Result<ParticleSpec> {
    Ok(match name {
        "builtin:lih" => ParticleSpec::lih(),
        "builtin:rb32s" => ParticleSpec::rb32s_template(),
        _ => {
            let path = resolve(base, name);
            ParticleSpec::load(&path).with_context(|| format!("particle file {}", path.display()))?
        }
    })
}

fn load_material(base: &Path, name: &str) -> Result<Material> {
    Ok(match name {
        "builtin:gold" => Material::gold(),
        "builtin:perfect_conductor" => Material::perfect_conductor(),
        _ => {
            let path = resolve(base, name);
            Material::load(&path).with_context(|| format!("material file {}", path.display()))?
        }
    })
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
        let raw: ScenarioFile =
            toml::from_str(&text).map_err(|e| UsageError(format!("scenario {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let particle = load_particle(base, &raw.particle)?;
        let material = load_material(base, &raw.material)?;
        let state = match raw.state {
            Some(s) => s,
            None => particle
                .states
                .iter()
                .find(|s| s.population > 0.0)
                .map(|s| s.label.clone())
                .ok_or_else(|| UsageError("particle has no populated state; set 'state'".into()))?,
        };
        if particle.state(&state).is_none() {
            bail!(UsageError(format!("unknown state '{state}'")));
        }
        if !(raw.temperature >= 0.0) {
            bail!(UsageError(format!("temperature_K must be >= 0 (got {})", raw.temperature)));
        }
        let modes = raw.modes.iter().map(|m| m.parse()).collect::<cpcavity::Result<Vec<ResonanceMode>>>()?;
        raw.quadrature.validate()?;
        Ok(Self {
            particle,
            material,
            state,
            temperature: raw.temperature,
            target: raw.target,
            modes,
            scan: raw.scan,
            profile: raw.profile,
            scaling: raw.scaling,
            quadrature: raw.quadrature,
        })
    }

    pub fn first_mode(&self) -> Result<ResonanceMode> {
        self.modes.first().copied().ok_or_else(|| UsageError("scenario lists no modes".into()).into())
    }

    /// Dominant transition frequency |ω|, rad/s.
    pub fn omega(&self) -> Result<f64> {
        Ok(self.particle.dominant_channel(&self.state)?.omega_kn.abs())
    }

    pub fn cavity(&self, radius: f64, rho: f64) -> CavityConfig {
        CavityConfig { radius, material: self.material.clone(), temperature: self.temperature, rho }
    }

    pub fn sweep(&self) -> Result<Sweep> {
        let s = self.scaling.as_ref().ok_or_else(|| UsageError("scenario has no [scaling] section".into()))?;
        if s.values.is_empty() {
            bail!(UsageError("scaling grid is empty".into()));
        }
        let values = s.values.clone();
        Ok(match s.sweep.as_str() {
            "eps_magnitude" => Sweep::EpsMagnitude { magnitudes: values, arg: s.eps_arg.unwrap_or(std::f64::consts::FRAC_PI_2) },
            "eps_phase" => {
                let magnitude = match s.eps_abs {
                    Some(a) => a,
                    None => match self.material.eps_real_freq(self.omega()?)?.finite() {
                        Some(e) => e.norm(),
                        None => bail!(UsageError("eps_phase sweep needs eps_abs for a perfect conductor".into())),
                    },
                };
                Sweep::EpsPhase { args: values, magnitude }
            }
            "omega" => Sweep::Omega { omegas: values },
            "principal_n" => Sweep::PrincipalN {
                ns: values,
                n_ref: s.n_ref.ok_or_else(|| UsageError("principal_n sweep needs n_ref".into()))?,
            },
            other => bail!(UsageError(format!("unknown sweep '{other}'"))),
        })
    }
}
