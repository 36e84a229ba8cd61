use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cpcavity")
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const RB_GOLD: &str = r#"
particle = "builtin:rb32s"
material = "builtin:gold"
temperature_K = 300.0
modes = ["0,1,N"]
"#;

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn empty_window_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for scan in ["offset_lo_m = -1e-6\noffset_hi_m = 1e-6\npoints = 0", "offset_lo_m = 1e-6\noffset_hi_m = 1e-6\npoints = 5"] {
        let sc = write_scenario(dir.path(), "empty.scn", &format!("{RB_GOLD}\n[scan]\n{scan}\n"));
        let out = run(&["radius-scan", "--scenario", sc.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("empty radius window"));
    }
}

#[test]
fn bad_inputs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&["radius-scan", "--scenario", dir.path().join("nope.scn").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_mode = write_scenario(dir.path(), "m.scn", &RB_GOLD.replace("0,1,N", "0,0,N"));
    assert_eq!(run(&["resonances", "--scenario", bad_mode.to_str().unwrap()]).status.code(), Some(2));
    let bad_key = write_scenario(dir.path(), "k.scn", &format!("{RB_GOLD}\nbogus = 1\n"));
    assert_eq!(run(&["profile", "--scenario", bad_key.to_str().unwrap()]).status.code(), Some(2));
    let sc = write_scenario(dir.path(), "ok.scn", RB_GOLD);
    assert_eq!(run(&["validate", "--scenario", sc.to_str().unwrap(), "--theta", "2.0"]).status.code(), Some(2));
    assert_eq!(run(&["radius-scan"]).status.code(), Some(2));
}

#[test]
fn serial_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        dir.path(),
        "scan.scn",
        &format!("{RB_GOLD}\ntarget = \"both\"\n[scan]\noffset_lo_m = -6e-7\noffset_hi_m = 2e-7\npoints = 9\nrho_fraction = 0.0\n"),
    );
    let mut outputs = Vec::new();
    for (name, extra) in [("a.csv", "--serial"), ("b.csv", "--serial"), ("c.csv", "--jobs=3")] {
        let out = dir.path().join(name);
        let res = run(&["radius-scan", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap(), extra]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        outputs.push((fs::read(&out).unwrap(), fs::read(out.with_extension("json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with(&format!("# cpcavity {}; units:", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("R_m,offset_m,U_res_J,Gamma1_per_s"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 9);
    let sample = text.lines().last().unwrap().split(',').next().unwrap();
    let mantissa = sample.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 12);

    let marks: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    let targets = marks["targets"].as_array().unwrap();
    let r_perfect = marks["r_perfect_m"].as_f64().unwrap();
    let pot = targets[0]["r_refined_m"].as_f64().unwrap();
    let rate = targets[1]["r_refined_m"].as_f64().unwrap();
    assert!(pot < rate && rate < r_perfect);
}

#[test]
fn perfect_conductor_peaks_at_perfect_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pc.csv");
    let res = run(&[
        "radius-scan",
        "--scenario",
        scenarios().join("perfect_conductor.scn").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "4",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    let step = rows[1][0] - rows[0][0];
    let best = rows.iter().max_by(|a, b| a[2].abs().total_cmp(&b[2].abs())).unwrap();
    assert!(best[1].abs() <= step, "maximum at offset {} m, grid step {step} m", best[1]);
    let marks: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert!(marks["targets"][0]["r_refined_m"].is_null());
}

#[test]
fn profile_reports_minima_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write_scenario(
        dir.path(),
        "prof.scn",
        &(RB_GOLD.replace("modes = [\"0,1,N\"]", "modes = [\"0,2,N\", \"1,1,N\"]") + "\n[profile]\npoints = 61\n"),
    );
    let out = dir.path().join("p.csv");
    let res = run(&["profile", "--scenario", sc.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", "4"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary[0]["local_minima"], 2);
    assert_eq!(summary[1]["local_minima"], 1);
    assert_eq!(summary[1]["double_resonance"], true);
    let csv = fs::read_to_string(&out).unwrap();
    // mirrored: 2·61 − 1 rows per mode
    assert_eq!(csv.lines().filter(|l| l.starts_with("0,2,N")).count(), 121);
}

#[test]
fn checked_in_scenarios_parse() {
    for entry in fs::read_dir(scenarios()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("scn") {
            // --theta out of range fails only after the scenario has loaded
            let res = run(&["validate", "--scenario", path.to_str().unwrap(), "--theta=-1"]);
            let err = String::from_utf8_lossy(&res.stderr);
            assert!(err.contains("theta"), "{}: {err}", path.display());
        }
    }
}

#[test]
fn default_validation_passes() {
    let res = run(&["validate", "--scenario", scenarios().join("validate.scn").to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "{stdout}{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
