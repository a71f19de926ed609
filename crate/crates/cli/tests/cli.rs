use std::fs;
use std::path::Path;

use cparticle_cli::output::{read_manifest, verify};
use cparticle_cli::{run, EXIT_CHECK, EXIT_CONFIG, EXIT_OK};

fn run_in(out: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["cparticle"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", out.to_str().unwrap()]);
    run(full)
}

#[test]
fn spectral_check_passes_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("spectral");
    assert_eq!(run_in(&out, &["spectral-check", "--points", "256"]), EXIT_OK);
    let manifest = read_manifest(&out).unwrap();
    assert_eq!(manifest.scenario, "spectral-check");
    assert_eq!(manifest.config.get("points").unwrap(), "256");
    assert!(manifest.checks.iter().all(|c| c.passed));
    assert!(manifest.files.contains_key("spectral.csv"));
    assert!(verify(&out).unwrap().is_empty());
    assert_eq!(run(["cparticle", "verify", "--out", out.to_str().unwrap()]), EXIT_OK);

    // Any edit to a data file is detected.
    let data = out.join("expansion.csv");
    let mut bytes = fs::read(&data).unwrap();
    bytes.push(b'\n');
    fs::write(&data, bytes).unwrap();
    assert_eq!(verify(&out).unwrap(), vec!["expansion.csv".to_string()]);
    assert_eq!(run(["cparticle", "verify", "--out", out.to_str().unwrap()]), EXIT_CHECK);
}

#[test]
fn invalid_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    assert_eq!(run_in(&out, &["lattice-evolve", "--steps", "60"]), EXIT_CONFIG);
    assert_eq!(run_in(&out, &["double-slit", "--a", "9", "--t1", "8"]), EXIT_CONFIG);
    assert_eq!(run_in(&out, &["continuum-check", "--delta", "0.1"]), EXIT_CONFIG);
    assert_eq!(run_in(&out, &["clock-pattern", "--t", "-1"]), EXIT_CONFIG);
    assert_eq!(run_in(&out, &["spectral-check", "--format", "xml"]), EXIT_CONFIG);
    assert!(!out.exists());
}

#[test]
fn config_file_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# illustrative\nt = 1.5\nx_max = 2\nraster-t-step = 0.5\n").unwrap();
    let out = tmp.path().join("clock");
    let code = run_in(&out, &["clock-pattern", "--config", cfg.to_str().unwrap(), "--x-max", "3"]);
    assert_eq!(code, EXIT_OK);
    let m = read_manifest(&out).unwrap();
    assert_eq!(m.config.get("t").unwrap(), "1.5");
    assert_eq!(m.config.get("x-max").unwrap(), "3");
    assert_eq!(m.config.get("period").unwrap(), "4");
    // t < T/2: no interior crossing on the slice.
    let slice = fs::read_to_string(out.join("slice.csv")).unwrap();
    let parities: Vec<&str> = slice
        .lines()
        .skip(1)
        .filter(|l| l.ends_with("true"))
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert!(!parities.is_empty());
    assert!(parities.iter().all(|p| *p == "1"));

    fs::write(&cfg, "t = 1.5\nunknown-key = 1\n").unwrap();
    let out = tmp.path().join("clock2");
    assert_eq!(run_in(&out, &["clock-pattern", "--config", cfg.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("slit");
    let code = run_in(&out, &["double-slit", "--x-min", "-36", "--x-max", "36", "--x-step", "0.05"]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(out.join("screen.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,in_cone,phi,phi_sq,classical,feynman_intensity");
    assert_eq!(lines.count(), 1441);
    let gaps = fs::read_to_string(out.join("gaps.csv")).unwrap();
    assert!(gaps.starts_with("first,last,samples\n"));
}

#[test]
fn json_format_and_failed_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("prop");
    // The default window holds no propagator zero crossing, so the spacing
    // check cannot pass and the run exits with the check-failure code.
    assert_eq!(run_in(&out, &["propagator-compare", "--format", "json"]), EXIT_CHECK);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["insufficient_crossings"], serde_json::Value::Bool(true));
    assert_eq!(report["passed"], serde_json::Value::Bool(false));
    let rows: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("propagator.json")).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 801);

    // A wider window sees crossings of both signals.
    let wide = tmp.path().join("wide");
    run_in(&wide, &["propagator-compare", "--window", "15"]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(wide.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["insufficient_crossings"], serde_json::Value::Bool(false));
}

#[test]
fn lattice_evolve_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("lattice");
    let code = run_in(&out, &["lattice-evolve", "--steps", "32", "--mc-paths", "20000", "--seed", "5"]);
    assert_eq!(code, EXIT_OK);
    let m = read_manifest(&out).unwrap();
    for f in ["decomposed.csv", "four_state.csv", "moments.csv", "monte_carlo.csv"] {
        assert!(m.files.contains_key(f), "{f}");
    }
    let moments = fs::read_to_string(out.join("moments.csv")).unwrap();
    assert_eq!(moments.lines().count(), 34);

    let again = tmp.path().join("again");
    run_in(&again, &["lattice-evolve", "--steps", "32", "--mc-paths", "20000", "--seed", "5", "--threads", "3"]);
    assert_eq!(read_manifest(&again).unwrap().files, m.files);
    let other = tmp.path().join("other");
    run_in(&other, &["lattice-evolve", "--steps", "32", "--mc-paths", "20000", "--seed", "6"]);
    assert_ne!(
        read_manifest(&other).unwrap().files.get("monte_carlo.csv"),
        m.files.get("monte_carlo.csv")
    );
}
