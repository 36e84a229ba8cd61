//! Permittivity models of the cavity wall.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Permittivity value; perfect conductors are carried symbolically so that the
/// reflection coefficients can switch to their exact limiting form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Permittivity<T> {
    Finite(T),
    PerfectConductor,
}

impl<T: Copy> Permittivity<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Permittivity::Finite(v) => Some(v),
            Permittivity::PerfectConductor => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub omega: f64,
    pub eps: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Drude { omega_p: f64, gamma: f64 },
    Plasma { omega_p: f64 },
    PerfectConductor,
    /// Rows sorted by strictly increasing frequency.
    Tabulated(Vec<TableRow>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub model: Model,
}

impl Material {
    pub fn drude(name: &str, omega_p: f64, gamma: f64) -> Result<Self> {
        if !(omega_p > 0.0) || !(gamma >= 0.0) {
            return Err(Error::InvalidInput(format!("drude needs omega_p > 0, gamma >= 0 (got {omega_p}, {gamma})")));
        }
        Ok(Self { name: name.into(), model: Model::Drude { omega_p, gamma } })
    }

    pub fn plasma(name: &str, omega_p: f64) -> Result<Self> {
        if !(omega_p > 0.0) {
            return Err(Error::InvalidInput(format!("plasma needs omega_p > 0 (got {omega_p})")));
        }
        Ok(Self { name: name.into(), model: Model::Plasma { omega_p } })
    }

    pub fn perfect_conductor() -> Self {
        Self { name: "perfect conductor".into(), model: Model::PerfectConductor }
    }

    pub fn tabulated(name: &str, mut rows: Vec<TableRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("empty permittivity table".into()));
        }
        rows.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        if rows[0].omega <= 0.0 || rows.windows(2).any(|w| w[0].omega >= w[1].omega) {
            return Err(Error::InvalidInput("table frequencies must be positive and distinct".into()));
        }
        Ok(Self { name: name.into(), model: Model::Tabulated(rows) })
    }

    /// Non-dispersive permittivity `eps` pinned in a band around `omega`.
    /// Intended for sweeps over |eps| and arg eps at a fixed transition frequency.
    pub fn fixed_at(name: &str, omega: f64, eps: C64) -> Result<Self> {
        Self::tabulated(
            name,
            vec![TableRow { omega: 0.5 * omega, eps }, TableRow { omega: 2.0 * omega, eps }],
        )
    }

    /// Gold with the Drude parameters used throughout the examples.
    pub fn gold() -> Self {
        Self { name: "Au".into(), model: Model::Drude { omega_p: 1.4e16, gamma: 5.4e13 } }
    }

    pub fn eps_real_freq(&self, omega: f64) -> Result<Permittivity<C64>> {
        if !(omega > 0.0) {
            return Err(Error::InvalidInput(format!("real frequency must be positive (got {omega})")));
        }
        Ok(match &self.model {
            Model::Drude { omega_p, gamma } => Permittivity::Finite(drude(*omega_p, *gamma, omega)),
            Model::Plasma { omega_p } => Permittivity::Finite(drude(*omega_p, 0.0, omega)),
            Model::PerfectConductor => Permittivity::PerfectConductor,
            Model::Tabulated(rows) => Permittivity::Finite(interpolate(rows, omega)?),
        })
    }

    /// ε(iξ). For tables this is the Kramers-Kronig transform of Im ε over the
    /// tabulated band, so ξ must lie inside it.
    pub fn eps_imag_freq(&self, xi: f64) -> Result<Permittivity<f64>> {
        if !(xi > 0.0) {
            return Err(Error::InvalidInput(format!("imaginary frequency must be positive (got {xi})")));
        }
        Ok(match &self.model {
            Model::Drude { omega_p, gamma } => Permittivity::Finite(1.0 + omega_p * omega_p / (xi * (xi + gamma))),
            Model::Plasma { omega_p } => Permittivity::Finite(1.0 + omega_p * omega_p / (xi * xi)),
            Model::PerfectConductor => Permittivity::PerfectConductor,
            Model::Tabulated(rows) => {
                check_range(rows, xi)?;
                Permittivity::Finite(kramers_kronig(rows, xi))
            }
        })
    }

    pub fn is_perfect_conductor(&self) -> bool {
        matches!(self.model, Model::PerfectConductor)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let raw: MaterialFile = toml::from_str(s).map_err(|e| Error::Parse { what: "material".into(), msg: e.to_string() })?;
        raw.try_into()
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&MaterialFile::from(self)).expect("material serialises")
    }
}

fn drude(omega_p: f64, gamma: f64, omega: f64) -> C64 {
    let wp2 = omega_p * omega_p;
    let den = omega * omega + gamma * gamma;
    C64::new(1.0 - wp2 / den, gamma / omega * wp2 / den)
}

fn check_range(rows: &[TableRow], omega: f64) -> Result<()> {
    let (lo, hi) = (rows[0].omega, rows[rows.len() - 1].omega);
    if omega < lo || omega > hi {
        return Err(Error::OutOfRange { omega, lo, hi });
    }
    Ok(())
}

fn interpolate(rows: &[TableRow], omega: f64) -> Result<C64> {
    check_range(rows, omega)?;
    if rows.len() == 1 {
        return Ok(rows[0].eps);
    }
    let i = rows.partition_point(|r| r.omega <= omega).clamp(1, rows.len() - 1);
    let (a, b) = (&rows[i - 1], &rows[i]);
    let t = (omega.ln() - a.omega.ln()) / (b.omega.ln() - a.omega.ln());
    Ok(a.eps + (b.eps - a.eps) * t)
}

/// 1 + (2/π) ∫ ω Im ε(ω) / (ω² + ξ²) dω, trapezoid in ln ω over the table.
fn kramers_kronig(rows: &[TableRow], xi: f64) -> f64 {
    let f = |r: &TableRow| r.omega * r.omega * r.eps.im / (r.omega * r.omega + xi * xi);
    let integral: f64 = rows
        .windows(2)
        .map(|w| 0.5 * (f(&w[0]) + f(&w[1])) * (w[1].omega.ln() - w[0].omega.ln()))
        .sum();
    1.0 + 2.0 / PI * integral
}

/// Principal square root, kept in the closed first quadrant for Im ε >= 0
/// (a negative real ε maps to the positive imaginary axis).
pub fn sqrt_eps(eps: C64) -> C64 {
    if eps.im == 0.0 && eps.re < 0.0 {
        return C64::new(0.0, (-eps.re).sqrt());
    }
    eps.sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MaterialFile {
    name: String,
    model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    /// [omega_rad_s, re_eps, im_eps]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<[f64; 3]>>,
}

impl TryFrom<MaterialFile> for Material {
    type Error = Error;

    fn try_from(f: MaterialFile) -> Result<Self> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| Error::Parse { what: "material".into(), msg: format!("model '{}' needs '{key}'", f.model) })
        };
        match f.model.as_str() {
            "drude" => Material::drude(&f.name, need(f.omega_p, "omega_p")?, need(f.gamma, "gamma")?),
            "plasma" => Material::plasma(&f.name, need(f.omega_p, "omega_p")?),
            "perfect_conductor" => Ok(Material { name: f.name.clone(), model: Model::PerfectConductor }),
            "tabulated" => {
                let table = f.table.clone().ok_or_else(|| Error::Parse {
                    what: "material".into(),
                    msg: "tabulated model needs 'table'".into(),
                })?;
                let rows = table.iter().map(|r| TableRow { omega: r[0], eps: C64::new(r[1], r[2]) }).collect();
                Material::tabulated(&f.name, rows)
            }
            other => Err(Error::Parse { what: "material".into(), msg: format!("unknown model '{other}'") }),
        }
    }
}

impl From<&Material> for MaterialFile {
    fn from(m: &Material) -> Self {
        let mut f = MaterialFile { name: m.name.clone(), model: String::new(), omega_p: None, gamma: None, table: None };
        match &m.model {
            Model::Drude { omega_p, gamma } => {
                f.model = "drude".into();
                f.omega_p = Some(*omega_p);
                f.gamma = Some(*gamma);
            }
            Model::Plasma { omega_p } => {
                f.model = "plasma".into();
                f.omega_p = Some(*omega_p);
            }
            Model::PerfectConductor => f.model = "perfect_conductor".into(),
            Model::Tabulated(rows) => {
                f.model = "tabulated".into();
                f.table = Some(rows.iter().map(|r| [r.omega, r.eps.re, r.eps.im]).collect());
            }
        }
        f
    }
}
