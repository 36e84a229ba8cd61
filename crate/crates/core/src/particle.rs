//! Internal structure of the particle: populations, dipole transitions and
//! the quantities built from them.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::constants::{HBAR, K_B, RYDBERG_ENERGY};
use crate::error::{Error, Result};

const LIH: &str = include_str!("../data/lih.toml");
const RB32S: &str = include_str!("../data/rb32s_template.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub label: String,
    pub population: f64,
}

/// Dipole transition from `from` (|n>) to `to` (|k>), with ω_kn = ω_k - ω_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub to: String,
    #[serde(rename = "omega_rad_s")]
    pub omega: f64,
    /// |d_nk|², C²m². Derived from `dipole_vec` when only that is given.
    #[serde(rename = "dipole_sq_C2m2", default, skip_serializing_if = "Option::is_none")]
    pub dipole_sq: Option<f64>,
    /// Cylindrical components (ρ, φ, z) of d_nk, C·m.
    #[serde(rename = "dipole_vec_Cm", default, skip_serializing_if = "Option::is_none")]
    pub dipole_vec: Option<[f64; 3]>,
}

impl Transition {
    pub fn new(from: &str, to: &str, omega: f64, dipole_sq: f64) -> Self {
        Self { from: from.into(), to: to.into(), omega, dipole_sq: Some(dipole_sq), dipole_vec: None }
    }

    pub fn reversed(&self) -> Self {
        Self { from: self.to.clone(), to: self.from.clone(), omega: -self.omega, ..self.clone() }
    }

    pub fn dipole_sq(&self) -> f64 {
        match (self.dipole_sq, self.dipole_vec) {
            (Some(d2), _) => d2,
            (None, Some(v)) => v.iter().map(|c| c * c).sum(),
            (None, None) => 0.0,
        }
    }

    /// |d_i|² per cylindrical axis; isotropic split when no vector is given.
    pub fn dipole_components_sq(&self) -> [f64; 3] {
        match self.dipole_vec {
            Some(v) => v.map(|c| c * c),
            None => [self.dipole_sq() / 3.0; 3],
        }
    }
}

/// One dipole channel seen from a given state: ω_kn measured from that state.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<'a> {
    pub transition: &'a Transition,
    pub omega_kn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec {
    pub name: String,
    #[serde(default = "default_true")]
    pub isotropic: bool,
    pub states: Vec<State>,
    pub transitions: Vec<Transition>,
}

fn default_true() -> bool {
    true
}

impl ParticleSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("particle '{}': {msg}", self.name)));
        if self.states.is_empty() {
            return bad("no states".into());
        }
        for (i, s) in self.states.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.population) {
                return bad(format!("population of '{}' outside [0, 1]", s.label));
            }
            if self.states[..i].iter().any(|o| o.label == s.label) {
                return bad(format!("duplicate state '{}'", s.label));
            }
        }
        let total: f64 = self.states.iter().map(|s| s.population).sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("populations sum to {total}, not 1"));
        }
        for t in &self.transitions {
            if self.state(&t.from).is_none() || self.state(&t.to).is_none() {
                return bad(format!("transition {} -> {} names an unknown state", t.from, t.to));
            }
            if t.from == t.to {
                return bad(format!("transition {} -> {} connects a state to itself", t.from, t.to));
            }
            if !(t.omega != 0.0 && t.omega.is_finite()) {
                return bad(format!("transition {} -> {} has zero frequency", t.from, t.to));
            }
            if t.dipole_sq.is_none() && t.dipole_vec.is_none() {
                return bad(format!("transition {} -> {} has no dipole", t.from, t.to));
            }
            if !(t.dipole_sq() >= 0.0) || t.dipole_vec.is_some_and(|v| v.iter().any(|c| !c.is_finite())) {
                return bad(format!("transition {} -> {} has an invalid dipole", t.from, t.to));
            }
        }
        Ok(())
    }

    pub fn state(&self, label: &str) -> Option<&State> {
        self.states.iter().find(|s| s.label == label)
    }

    /// All channels of `state`, with ω_kn taken relative to it.
    pub fn channels(&self, state: &str) -> Result<Vec<Channel<'_>>> {
        if self.state(state).is_none() {
            return Err(Error::InvalidInput(format!("unknown state '{state}' in particle '{}'", self.name)));
        }
        Ok(self
            .transitions
            .iter()
            .filter_map(|t| {
                if t.from == state {
                    Some(Channel { transition: t, omega_kn: t.omega })
                } else if t.to == state {
                    Some(Channel { transition: t, omega_kn: -t.omega })
                } else {
                    None
                }
            })
            .collect())
    }

    /// Channel with the largest |d|², used to set frequency scales.
    pub fn dominant_channel(&self, state: &str) -> Result<Channel<'_>> {
        self.channels(state)?
            .into_iter()
            .max_by(|a, b| a.transition.dipole_sq().total_cmp(&b.transition.dipole_sq()))
            .ok_or_else(|| Error::InvalidInput(format!("state '{state}' has no transitions")))
    }

    /// Same particle with every state population replaced.
    pub fn with_populations(&self, pops: &[(&str, f64)]) -> Result<Self> {
        let mut out = self.clone();
        for s in out.states.iter_mut() {
            s.population = pops.iter().find(|(l, _)| *l == s.label).map_or(0.0, |(_, p)| *p);
        }
        out.validate()?;
        Ok(out)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: ParticleSpec = toml::from_str(s).map_err(|e| Error::Parse { what: "particle".into(), msg: e.to_string() })?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("particle serialises")
    }

    /// LiH in its rotational ground state.
    pub fn lih() -> Self {
        Self::from_toml_str(LIH).expect("bundled LiH data")
    }

    /// Rb in 32s with the 32s -> 31p3/2 channel; the dipole is a placeholder.
    pub fn rb32s_template() -> Self {
        Self::from_toml_str(RB32S).expect("bundled Rb data")
    }
}

/// Bose-Einstein occupation 1/(exp(ħω/k_BT) - 1); zero for T = 0.
pub fn photon_number(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidInput(format!("photon number needs omega > 0 (got {omega})")));
    }
    if !(temperature >= 0.0) {
        return Err(Error::InvalidInput(format!("temperature must be >= 0 (got {temperature})")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    if x > 700.0 {
        return Ok(0.0);
    }
    Ok(1.0 / x.exp_m1())
}

/// Isotropic polarizability α_n(ω) = (2/3ħ) Σ_k |d_nk|² ω_kn/(ω_kn² - ω²), C²m²/J.
pub fn polarizability_iso(p: &ParticleSpec, state: &str, omega: C64) -> Result<C64> {
    let w2 = omega * omega;
    let mut sum = C64::new(0.0, 0.0);
    for ch in p.channels(state)? {
        let wk2 = ch.omega_kn * ch.omega_kn;
        let den = wk2 - w2;
        if den.norm() < 1e-12 * wk2 {
            return Err(Error::Pole(format!("polarizability at resonance |omega| = {:e}", ch.omega_kn.abs())));
        }
        sum += ch.transition.dipole_sq() * ch.omega_kn / den;
    }
    Ok(2.0 / (3.0 * HBAR) * sum)
}

/// α_n(iξ), real.
pub fn polarizability_imag(p: &ParticleSpec, state: &str, xi: f64) -> Result<f64> {
    polarizability_iso(p, state, C64::new(0.0, xi)).map(|a| a.re)
}

/// Characteristic thermal principal quantum number (2 Ry/k_BT)^{1/3}.
pub fn rydberg_thermal_n(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidInput(format!("temperature must be positive (got {temperature})")));
    }
    Ok((2.0 * RYDBERG_ENERGY / (K_B * temperature)).cbrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn photon_number_values() {
        let omega = 2f64.ln() * K_B * 300.0 / HBAR;
        assert!((photon_number(omega, 300.0).unwrap() - 1.0).abs() < 1e-12);
        let n = photon_number(2.79e12, 300.0).unwrap();
        assert!((n - 13.6).abs() < 0.05, "{n}");
        assert_eq!(photon_number(2.79e12, 0.0).unwrap(), 0.0);
        assert_eq!(photon_number(1e16, 1e-3).unwrap(), 0.0);
        assert!(photon_number(-1.0, 300.0).is_err());
    }

    #[test]
    fn static_polarizability_of_lih() {
        let p = ParticleSpec::lih();
        let a = polarizability_iso(&p, "J=0", C64::new(0.0, 0.0)).unwrap();
        let expect = 2.0 / (3.0 * HBAR) * 3.85e-58 / 2.79e12;
        assert!((a.re - expect).abs() < 1e-14 * expect);
        assert_eq!(a.im, 0.0);
        // excited state: the same channel seen downward gives the opposite sign
        let b = polarizability_iso(&p, "J=1", C64::new(0.0, 0.0)).unwrap();
        assert!((a + b).norm() < 1e-14 * expect);
    }

    #[test]
    fn polarizability_pole_is_reported() {
        let p = ParticleSpec::lih();
        assert!(matches!(polarizability_iso(&p, "J=0", C64::new(2.79e12, 0.0)), Err(Error::Pole(_))));
    }

    #[test]
    fn imaginary_axis_polarizability_decreases() {
        let p = ParticleSpec::lih();
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let a = polarizability_imag(&p, "J=0", 1e10 * 1.4f64.powi(i)).unwrap();
            assert!(a > 0.0 && a < prev);
            prev = a;
        }
    }

    #[test]
    fn thermal_quantum_number() {
        let n = rydberg_thermal_n(300.0).unwrap();
        assert!((n - 10.2).abs() < 0.1, "{n}");
        let ratio = rydberg_thermal_n(2400.0).unwrap() / n;
        assert!((ratio - 0.5).abs() < 1e-12);
        let t = 2.0 * RYDBERG_ENERGY / K_B;
        assert!((rydberg_thermal_n(t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bundled_particles_and_round_trip() {
        for p in [ParticleSpec::lih(), ParticleSpec::rb32s_template()] {
            let s = p.to_toml_string();
            let back = ParticleSpec::from_toml_str(&s).unwrap();
            assert_eq!(back, p);
            assert_eq!(back.to_toml_string(), s);
        }
        let rb = ParticleSpec::rb32s_template();
        assert_eq!(rb.dominant_channel("32s").unwrap().omega_kn, -9.013e11);
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut p = ParticleSpec::lih();
        p.states[0].population = 0.7;
        assert!(p.validate().is_err());
        let mut p = ParticleSpec::lih();
        p.transitions[0].omega = 0.0;
        assert!(p.validate().is_err());
        let mut p = ParticleSpec::lih();
        p.transitions[0].to = "nowhere".into();
        assert!(p.validate().is_err());
        assert!(matches!(ParticleSpec::from_toml_str("name = 3"), Err(Error::Parse { .. })));
    }

    #[test]
    fn reversal_negates_frequency() {
        let t = Transition::new("a", "b", 1e12, 2e-58);
        let r = t.reversed();
        assert_eq!(r.omega, -1e12);
        assert_eq!(r.dipole_sq(), t.dipole_sq());
        assert_eq!(r.reversed(), t);
    }

    proptest! {
        #[test]
        fn ground_state_polarizability_positive_below_resonance(frac in 0.0f64..0.999, d2 in 1e-60f64..1e-50) {
            let p = ParticleSpec {
                name: "two-level".into(),
                isotropic: true,
                states: vec![State { label: "g".into(), population: 1.0 }, State { label: "e".into(), population: 0.0 }],
                transitions: vec![Transition::new("g", "e", 1e12, d2)],
            };
            let a = polarizability_iso(&p, "g", C64::new(frac * 1e12, 0.0)).unwrap();
            prop_assert!(a.re > 0.0 && a.im == 0.0);
        }

        #[test]
        fn round_trip_arbitrary_transition(omega in -1e15f64..1e15, d2 in 0.0f64..1e-50, pop in 0.0f64..1.0) {
            prop_assume!(omega != 0.0);
            let p = ParticleSpec {
                name: "x".into(),
                isotropic: false,
                states: vec![State { label: "a".into(), population: pop }, State { label: "b".into(), population: 1.0 - pop }],
                transitions: vec![Transition { from: "a".into(), to: "b".into(), omega, dipole_sq: Some(d2), dipole_vec: Some([1e-30, -2e-30, 0.5e-30]) }],
            };
            let back = ParticleSpec::from_toml_str(&p.to_toml_string()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
