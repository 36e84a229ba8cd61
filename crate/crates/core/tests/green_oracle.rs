//! Green tensor against direct evaluation with unreduced Bessel functions and
//! against the planar half-space limit near the wall.

use std::f64::consts::PI;
use std::time::Instant;

use cpcavity::constants::C;
use cpcavity::green::{green_diag_imag, green_trace_real, halfspace_trace_imag, halfspace_trace_oracle, QuadratureSpec};
use cpcavity::material::{Material, Permittivity};
use cpcavity::numerics::integrate;
use cpcavity::specfun::{bessel_h1, bessel_h1_prime, bessel_j, bessel_j_prime};
use num_complex::Complex64 as C64;

const OMEGA: f64 = 9.013e11;
const I: C64 = C64 { re: 0.0, im: 1.0 };

fn root_upper(w: C64) -> C64 {
    let r = w.sqrt();
    if r.im < 0.0 {
        -r
    } else {
        r
    }
}

/// (r_M, r_N) from raw Bessel values
fn raw_reflection(m: u32, k: f64, q: C64, radius: f64, eps: Option<C64>) -> (C64, C64) {
    let eta = root_upper(k * k - q * q);
    let x = eta * radius;
    let j = bessel_j(m, x).unwrap();
    let jp = bessel_j_prime(m, x).unwrap();
    let h = bessel_h1(m, x).unwrap();
    let hp = bessel_h1_prime(m, x).unwrap();
    let Some(eps) = eps else {
        return (-hp / jp, -h / j);
    };
    let x1 = root_upper(eps * k * k - q * q) * radius;
    let h1 = bessel_h1(m, x1).unwrap();
    let h1p = bessel_h1_prime(m, x1).unwrap();
    let (jt, ht, h1t) = (jp / j, hp / h, h1p / h1);
    let kr = k * radius;
    let qr = q * radius;
    let mf = m as f64;
    let a = -mf * mf * kr * kr * qr * qr * (eps - 1.0) * (eps - 1.0);
    let pre = x1 * x1 * x * x;
    let bm = pre * (eps * h1t * h1t * x * x - (h1t * jt + eps * h1t * ht) * x1 * x + ht * jt * x1 * x1);
    let bn = pre * (eps * h1t * h1t * x * x - (eps * h1t * jt + h1t * ht) * x1 * x + ht * jt * x1 * x1);
    let bd = pre * (eps * h1t * h1t * x * x - (eps + 1.0) * h1t * jt * x1 * x + jt * jt * x1 * x1);
    (-(h / j) * (a + bm) / (a + bd), -(h / j) * (a + bn) / (a + bd))
}

fn raw_trace(rho: f64, radius: f64, eps: Option<C64>, m_max: u32) -> C64 {
    let k = OMEGA / C;
    let rot = C64::from_polar(1.0, -0.1);
    let f = |s: f64| {
        let q = rot * s;
        let eta = root_upper(k * k - q * q);
        let mut sum = C64::new(0.0, 0.0);
        for m in 0..=m_max {
            let (rm, rn) = raw_reflection(m, k, q, radius, eps);
            let w = if m == 0 { 0.5 } else { 1.0 };
            let (jj, jp) = if rho == 0.0 {
                match m {
                    1 => (C64::new(0.5, 0.0), C64::new(0.5, 0.0)),
                    _ => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
                }
            } else {
                let a = eta * rho;
                (m as f64 / a * bessel_j(m, a).unwrap(), bessel_j_prime(m, a).unwrap())
            };
            let j0 = if rho == 0.0 { if m == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) } } else { bessel_j(m, eta * rho).unwrap() };
            let side = (jj * jj + jp * jp) * (rm + q * q / (k * k) * rn);
            sum += w * (side + eta * eta / (k * k) * j0 * j0 * rn);
        }
        Ok([rot * sum])
    };
    let end = 40.0 / (radius - rho);
    let out = integrate(f, &[0.0, 0.25 * k, 0.5 * k, k, 1.5 * k, 2.0 * k, 4.0 * k, end], 1e-11, 0.0, 4000).unwrap();
    I / (2.0 * PI) * out.value[0]
}

fn tight() -> QuadratureSpec {
    QuadratureSpec { rel_tol: 1e-11, ..Default::default() }
}

#[test]
fn on_axis_trace_matches_unreduced_evaluation() {
    let k = OMEGA / C;
    let dielectric = C64::new(-20.0, 5.0);
    for (kr, eps) in [(2.0, None), (3.3, None), (2.3, Some(dielectric)), (4.0, Some(dielectric))] {
        let radius = kr / k;
        let mat = match eps {
            None => Material::perfect_conductor(),
            Some(e) => Material::fixed_at("dielectric", OMEGA, e).unwrap(),
        };
        let ours = green_trace_real(0.0, OMEGA, radius, &mat, &tight()).unwrap();
        let oracle = raw_trace(0.0, radius, eps, 1);
        assert!((ours - oracle).norm() < 1e-10 * oracle.norm(), "kR = {kr}: {ours} vs {oracle}");
    }
}

#[test]
fn off_axis_trace_matches_unreduced_mode_sum() {
    let k = OMEGA / C;
    let dielectric = C64::new(-20.0, 5.0);
    let mat = Material::fixed_at("dielectric", OMEGA, dielectric).unwrap();
    for (kr, frac) in [(2.6, 0.3), (3.1, 0.6)] {
        let radius = kr / k;
        let ours = green_trace_real(frac * radius, OMEGA, radius, &mat, &tight()).unwrap();
        let oracle = raw_trace(frac * radius, radius, Some(dielectric), 40);
        assert!((ours - oracle).norm() < 1e-8 * oracle.norm(), "kR = {kr}: {ours} vs {oracle}");
    }
}

#[test]
fn near_wall_trace_tends_to_halfspace() {
    let k = OMEGA / C;
    let radius = 1000.0 / k;
    let spec = QuadratureSpec { rel_tol: 1e-6, ..Default::default() };
    for mat in [Material::gold(), Material::perfect_conductor()] {
        for kz in [0.5, 1.0, 2.0] {
            let z = kz / k;
            let t0 = Instant::now();
            let cyl = green_trace_real(radius - z, OMEGA, radius, &mat, &spec).unwrap();
            let hs = halfspace_trace_oracle(z, OMEGA, &mat).unwrap();
            eprintln!("{} kz={kz}: cyl {cyl:.4e} hs {hs:.4e} ({:?})", mat.name, t0.elapsed());
            assert!((cyl - hs).norm() < 0.05 * hs.norm(), "{} kz = {kz}: {cyl} vs {hs}", mat.name);
        }
    }
}

#[test]
fn near_wall_imaginary_frequency_tends_to_halfspace() {
    let radius = 1e-3;
    let spec = QuadratureSpec { rel_tol: 1e-6, ..Default::default() };
    for mat in [Material::perfect_conductor(), Material::gold()] {
        for (z, xi) in [(1e-6, 1e13), (5e-6, 3e12), (2e-6, 2e14)] {
            let cyl = green_diag_imag(radius - z, xi, radius, &mat, &spec).unwrap().trace.re;
            let hs = halfspace_trace_imag(z, xi, &mat).unwrap();
            assert!((cyl - hs).abs() < 0.02 * hs.abs(), "{} z = {z}, xi = {xi}: {cyl} vs {hs}", mat.name);
            assert!(hs < 0.0);
        }
    }
    assert!(matches!(Material::gold().eps_imag_freq(1e13).unwrap(), Permittivity::Finite(_)));
}
