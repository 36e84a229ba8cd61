use anyhow::{bail, Context, Result};
use cpcavity::constants::C;
use cpcavity::green::{green_diag_imag, green_trace_real, halfspace_trace_oracle, QuadratureSpec};
use cpcavity::observables::nonresonant_potential;
use cpcavity::resonance::{
    analytic_radius, analytic_shift, count_local_minima, minima_prominences, observable, perfect_radius, refine_radius, scaling_report,
    ResonanceMode, ResonanceResult, Target, MINIMA_REL_PROMINENCE,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{num, opt, write_sidecar, Csv, VERSION};
use crate::scenario::{ProfileSection, RadiusChoice, Scenario};
use crate::{CheckFailed, Cli, Command, UsageError};

pub fn run(cli: &Cli) -> Result<()> {
    let path = cli.scenario.as_ref().ok_or_else(|| UsageError("--scenario is required".into()))?;
    let mut sc = Scenario::load(path)?;
    if let Some(theta) = cli.theta {
        sc.quadrature.theta = theta;
    }
    if let Some(tol) = cli.rel_tol {
        sc.quadrature.rel_tol = tol;
    }
    sc.quadrature.validate()?;
    let jobs = if cli.serial { 1 } else { cli.jobs };
    if jobs == 0 {
        bail!(UsageError("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().context("building worker pool")?;
    let out = cli.out.as_deref();
    pool.install(|| match cli.command {
        Command::RadiusScan => radius_scan(&sc, out),
        Command::Profile => profile(&sc, out),
        Command::Resonances => resonances(&sc, out),
        Command::Scaling => scaling(&sc, out),
        Command::Validate => validate(&sc, out),
    })
}

fn pol(mode: &ResonanceMode) -> &'static str {
    match mode.polarization {
        cpcavity::resonance::Polarization::M => "M",
        cpcavity::resonance::Polarization::N => "N",
    }
}

fn column(target: Target) -> &'static str {
    match target {
        Target::Potential => "U_res_J",
        Target::Rate => "Gamma1_per_s",
    }
}

#[derive(Serialize)]
struct TargetMarks {
    target: Target,
    delta: f64,
    r_analytic_m: f64,
    r_refined_m: Option<f64>,
    peak_value: Option<f64>,
    fwhm_m: Option<f64>,
    grid_argmax_m: f64,
    note: Option<String>,
}

#[derive(Serialize)]
struct ScanMarks {
    tool: String,
    mode: String,
    double_resonance: bool,
    rho_fraction: f64,
    r_perfect_m: f64,
    targets: Vec<TargetMarks>,
}

fn radius_scan(sc: &Scenario, out: Option<&std::path::Path>) -> Result<()> {
    let mode = sc.first_mode()?;
    let scan = sc.scan.as_ref().ok_or_else(|| UsageError("radius-scan needs a [scan] section".into()))?;
    if scan.points == 0 || !(scan.offset_hi_m > scan.offset_lo_m) {
        bail!(UsageError("empty radius window: need points >= 1 and offset_hi_m > offset_lo_m".into()));
    }
    let omega = sc.omega()?;
    let r_perfect = perfect_radius(&mode, omega)?;
    let frac = match scan.rho_fraction {
        Some(f) => f,
        None => mode.probe_fraction()?,
    };
    if !(0.0..1.0).contains(&frac) {
        bail!(UsageError(format!("rho_fraction must lie in [0, 1), got {frac}")));
    }
    if r_perfect + scan.offset_lo_m <= 0.0 {
        bail!(UsageError("radius window reaches R <= 0".into()));
    }
    let n = scan.points;
    let offsets: Vec<f64> = (0..n)
        .map(|i| if n == 1 { scan.offset_lo_m } else { scan.offset_lo_m + (scan.offset_hi_m - scan.offset_lo_m) * i as f64 / (n - 1) as f64 })
        .collect();
    let targets = sc.target.targets();
    let rows: Vec<Vec<f64>> = offsets
        .par_iter()
        .map(|&d| {
            let r = r_perfect + d;
            let cav = sc.cavity(r, frac * r);
            targets
                .iter()
                .map(|&t| observable(t, &sc.particle, &sc.state, &cav, &sc.quadrature))
                .collect::<cpcavity::Result<Vec<f64>>>()
        })
        .collect::<cpcavity::Result<_>>()?;

    let mut header = vec!["R_m", "offset_m"];
    header.extend(targets.iter().map(|&t| column(t)));
    let mut csv = Csv::new("R_m [m], offset_m [m] from the perfect-conductor radius, U_res_J [J], Gamma1_per_s [1/s]", &header);
    csv.comment(&format!("mode {mode}, rho/R = {}", num(frac)));
    for (d, vals) in offsets.iter().zip(&rows) {
        let mut fields = vec![num(r_perfect + d), num(*d)];
        fields.extend(vals.iter().map(|&v| num(v)));
        csv.row(fields);
    }
    csv.write(out)?;

    let mut marks = Vec::new();
    for (k, &t) in targets.iter().enumerate() {
        let shift = analytic_shift(&mode, sc.material.eps_real_freq(omega)?, t)?;
        let argmax = offsets
            .iter()
            .zip(&rows)
            .max_by(|a, b| a.1[k].abs().total_cmp(&b.1[k].abs()))
            .map(|(d, _)| r_perfect + d)
            .expect("non-empty grid");
        let mut m = TargetMarks {
            target: t,
            delta: shift.delta,
            r_analytic_m: C * shift.kr / omega,
            r_refined_m: None,
            peak_value: None,
            fwhm_m: None,
            grid_argmax_m: argmax,
            note: None,
        };
        if sc.material.is_perfect_conductor() {
            m.note = Some("lossless wall: the resonance is a pole at the perfect-conductor radius".into());
        } else {
            let res = refine_radius(&mode, t, &sc.particle, &sc.state, &sc.cavity(r_perfect, 0.0), &sc.quadrature)?;
            m.r_refined_m = Some(res.r_refined);
            m.peak_value = Some(res.peak_value);
            m.fwhm_m = res.fwhm;
        }
        eprintln!(
            "{t}: R_perfect {} m, R_analytic {} m, R_refined {} m, grid max {} m",
            num(r_perfect),
            num(m.r_analytic_m),
            opt(m.r_refined_m),
            num(argmax)
        );
        marks.push(m);
    }
    write_sidecar(
        out,
        &ScanMarks {
            tool: format!("cpcavity {VERSION}"),
            mode: mode.to_string(),
            double_resonance: mode.double_resonance,
            rho_fraction: frac,
            r_perfect_m: r_perfect,
            targets: marks,
        },
    )
}

#[derive(Serialize)]
struct ProfileSummary {
    mode: String,
    target: Target,
    double_resonance: bool,
    radius_m: f64,
    local_minima: usize,
    deepest_minimum_value: Option<f64>,
    deepest_minimum_rho_m: Option<f64>,
    deepest_minimum_prominence: Option<f64>,
    extremum_value: f64,
    extremum_rho_m: f64,
}

fn mode_radius(sc: &Scenario, mode: &ResonanceMode, target: Target, sec: &ProfileSection) -> Result<f64> {
    Ok(match sec.radius {
        RadiusChoice::Analytic => analytic_radius(mode, target, &sc.particle, &sc.state, &sc.material)?,
        RadiusChoice::Refined => {
            refine_radius(mode, target, &sc.particle, &sc.state, &sc.cavity(1.0, 0.0), &sc.quadrature)?.r_refined
        }
    })
}

fn profile(sc: &Scenario, out: Option<&std::path::Path>) -> Result<()> {
    if sc.modes.is_empty() {
        bail!(UsageError("profile needs at least one mode".into()));
    }
    let default = ProfileSection { points: 91, rho_max_fraction: 0.9, radius: RadiusChoice::Analytic };
    let sec = sc.profile.as_ref().unwrap_or(&default);
    if sec.points < 3 || !(sec.rho_max_fraction > 0.0 && sec.rho_max_fraction < 1.0) {
        bail!(UsageError("profile needs points >= 3 and 0 < rho_max_fraction < 1".into()));
    }
    let cases: Vec<(ResonanceMode, Target)> =
        sc.modes.iter().flat_map(|m| sc.target.targets().into_iter().map(move |t| (*m, t))).collect();
    let radii: Vec<f64> = cases.par_iter().map(|(m, t)| mode_radius(sc, m, *t, sec)).collect::<Result<_>>()?;
    let rhos: Vec<f64> = (0..sec.points).map(|i| sec.rho_max_fraction * i as f64 / (sec.points - 1) as f64).collect();
    let jobs: Vec<(usize, f64)> = (0..cases.len()).flat_map(|c| rhos.iter().map(move |&f| (c, f))).collect();
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let r = radii[c];
            observable(cases[c].1, &sc.particle, &sc.state, &sc.cavity(r, f * r), &sc.quadrature)
        })
        .collect::<cpcavity::Result<_>>()?;

    let mut csv = Csv::new(
        "R_m [m], rho_m [m] (negative = mirrored half), value_SI [J for potential, 1/s for rate]",
        &["m", "j", "pol", "target", "R_m", "rho_m", "value_SI"],
    );
    let mut summary = Vec::new();
    for (c, (mode, target)) in cases.iter().enumerate() {
        let r = radii[c];
        let v = &values[c * rhos.len()..(c + 1) * rhos.len()];
        let prefix = vec![mode.m.to_string(), mode.j.to_string(), pol(mode).to_string(), target.to_string(), num(r)];
        let mirrored = (1..rhos.len()).rev().map(|i| (-rhos[i] * r, v[i])).chain(rhos.iter().zip(v).map(|(f, x)| (f * r, *x)));
        for (rho, x) in mirrored {
            let mut fields = prefix.clone();
            fields.push(num(rho));
            fields.push(num(x));
            csv.row(fields);
        }
        let (i_ext, ext) = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, x)| (i, *x))
            .expect("non-empty profile");
        let minima = count_local_minima(v, MINIMA_REL_PROMINENCE);
        let deepest = minima_prominences(v).into_iter().min_by(|a, b| v[a.0].total_cmp(&v[b.0]));
        println!(
            "{mode} {target}: R = {} m, {minima} local minima, deepest minimum {} (prominence {}), extremum {} at rho = {} m",
            num(r),
            opt(deepest.map(|d| v[d.0])),
            opt(deepest.map(|d| d.1)),
            num(ext),
            num(rhos[i_ext] * r)
        );
        summary.push(ProfileSummary {
            mode: mode.to_string(),
            target: *target,
            double_resonance: mode.double_resonance,
            radius_m: r,
            local_minima: minima,
            deepest_minimum_value: deepest.map(|d| v[d.0]),
            deepest_minimum_rho_m: deepest.map(|d| rhos[d.0] * r),
            deepest_minimum_prominence: deepest.map(|d| d.1),
            extremum_value: ext,
            extremum_rho_m: rhos[i_ext] * r,
        });
    }
    csv.write(out)?;
    write_sidecar(out, &summary)
}

fn resonances(sc: &Scenario, out: Option<&std::path::Path>) -> Result<()> {
    if sc.modes.is_empty() {
        bail!(UsageError("resonances needs at least one mode".into()));
    }
    let cases: Vec<(ResonanceMode, Target)> =
        sc.modes.iter().flat_map(|m| sc.target.targets().into_iter().map(move |t| (*m, t))).collect();
    let results: Vec<ResonanceResult> = cases
        .par_iter()
        .map(|(m, t)| refine_radius(m, *t, &sc.particle, &sc.state, &sc.cavity(1.0, 0.0), &sc.quadrature))
        .collect::<cpcavity::Result<_>>()?;
    let mut csv = Csv::new(
        "radii and widths [m], peak_value [J for potential, 1/s for rate]",
        &["m", "j", "pol", "target", "R_perfect_m", "R_analytic_m", "R_refined_m", "peak_value", "fwhm_m"],
    );
    for r in &results {
        csv.row(vec![
            r.mode.m.to_string(),
            r.mode.j.to_string(),
            pol(&r.mode).to_string(),
            r.target.to_string(),
            num(r.r_perfect),
            num(r.r_analytic),
            num(r.r_refined),
            num(r.peak_value),
            opt(r.fwhm),
        ]);
    }
    csv.write(out)?;
    write_sidecar(out, &results)
}

fn scaling(sc: &Scenario, out: Option<&std::path::Path>) -> Result<()> {
    let mode = sc.first_mode()?;
    let sweep = sc.sweep()?;
    let template = sc.cavity(1.0, 0.0);
    let mut csv = Csv::new(
        "R_refined_m [m], peak_value [J or 1/s], peak_per_photon [peak / (n or n+1)]",
        &["target", "parameter", "R_refined_m", "peak_value", "peak_per_photon"],
    );
    let mut reports = Vec::new();
    for t in sc.target.targets() {
        let rep = scaling_report(&sc.particle, &sc.state, &template, &mode, t, &sweep, &sc.quadrature)?;
        for row in &rep.rows {
            csv.row(vec![t.to_string(), num(row.parameter), num(row.r_refined), num(row.peak_value), num(row.peak_per_photon)]);
        }
        let line = format!(
            "{} {t}: exponent {}, growth {}, n_T {}",
            rep.sweep,
            opt(rep.exponent),
            num(rep.growth),
            opt(rep.n_thermal)
        );
        println!("{line}");
        csv.comment(&line);
        reports.push(rep);
    }
    csv.write(out)?;
    write_sidecar(out, &reports)
}

struct Check {
    name: &'static str,
    measured: f64,
    tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.measured <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn validate(sc: &Scenario, out: Option<&std::path::Path>) -> Result<()> {
    let omega = sc.omega()?;
    let k = omega / C;
    let spec = sc.quadrature;
    let mat = &sc.material;
    let mut checks = Vec::new();

    // a lossy cavity slightly off the fundamental resonance
    let radius = 1.01 * perfect_radius(&ResonanceMode::new(0, 1, cpcavity::resonance::Polarization::N)?, omega)?;
    let rho = 0.3 * radius;
    let tight = QuadratureSpec { rel_tol: spec.rel_tol.min(1e-10), ..spec };
    let g = green_trace_real(rho, omega, radius, mat, &tight)?;
    let g_half = green_trace_real(rho, omega, radius, mat, &QuadratureSpec { theta: 0.5 * tight.theta, ..tight })?;
    checks.push(Check { name: "contour_angle_invariance", measured: (g - g_half).norm() / g.norm(), tolerance: 1e-6 });

    let g_loose = green_trace_real(rho, omega, radius, mat, &spec)?;
    let g_strict = green_trace_real(rho, omega, radius, mat, &QuadratureSpec { rel_tol: spec.rel_tol * 1e-2, ..spec })?;
    checks.push(Check { name: "tolerance_refinement", measured: (g_loose - g_strict).norm() / g_strict.norm(), tolerance: 1e-6 });

    let far = 1000.0 / k;
    let mut worst: f64 = 0.0;
    for kz in [0.5, 1.0, 2.0] {
        let z = kz / k;
        let cyl = green_trace_real(far - z, omega, far, mat, &QuadratureSpec { rel_tol: 1e-6, ..spec })?;
        let hs = halfspace_trace_oracle(z, omega, mat)?;
        worst = worst.max((cyl - hs).norm() / hs.norm());
    }
    checks.push(Check { name: "halfspace_asymptote", measured: worst, tolerance: 0.05 });

    let gi = green_diag_imag(rho, omega, radius, mat, &spec)?.trace;
    checks.push(Check { name: "imaginary_frequency_realness", measured: gi.im.abs() / gi.norm().max(f64::MIN_POSITIVE), tolerance: 1e-10 });

    let near = sc.cavity(radius, radius - 1e-6);
    let u = nonresonant_potential(&sc.particle, &sc.state, &near, &spec)?;
    let u_strict = nonresonant_potential(
        &sc.particle,
        &sc.state,
        &near,
        &QuadratureSpec { matsubara_rel_tol: 0.1 * spec.matsubara_rel_tol, ..spec },
    )?;
    checks.push(Check { name: "matsubara_refinement", measured: rel(u, u_strict), tolerance: 10.0 * spec.matsubara_rel_tol });

    let mut csv = Csv::new("measured and tolerance are relative deviations", &["check", "measured", "tolerance", "pass"]);
    let mut failed = 0;
    for c in &checks {
        let status = if c.pass() { "PASS" } else { "FAIL" };
        println!("{status} {}: {} (tolerance {})", c.name, num(c.measured), num(c.tolerance));
        failed += usize::from(!c.pass());
        csv.row(vec![c.name.into(), num(c.measured), num(c.tolerance), c.pass().to_string()]);
    }
    if out.is_some() {
        csv.write(out)?;
    }
    if failed > 0 {
        bail!(CheckFailed(failed));
    }
    Ok(())
}
