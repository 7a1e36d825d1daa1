use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CAO2D: &str = r#"{"schema_version": 1, "family": "cao", "partition": [0, 0], "alpha": [0.0, 1.0], "a": 1.0, "seed": 7,
  "grids": {"xi1": 40, "xi2": 40, "t": 21, "curvature_samples": 12}}"#;
const TN2D_FLAT: &str =
    r#"{"schema_version": 1, "family": "taub_nut", "partition": [0, 0], "alpha": [0.0, 1.0], "a": 0.0, "seed": 7}"#;

fn gkrs(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkrs"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn setup(config: &str) -> (TempDir, std::path::PathBuf, std::path::PathBuf) {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    (dir, cfg, out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unusable_configuration_exits_with_two() {
    let (_dir, cfg, out) = setup(&CAO2D.replace("\"seed\"", "\"bogus\""));
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(2));
    let missing = cfg.with_file_name("absent.json");
    assert_eq!(gkrs(&["build"], &missing, &out).status.code(), Some(2));
    let (_dir, cfg, out) = setup(CAO2D);
    let o = Command::new(env!("CARGO_BIN_EXE_gkrs"))
        .args(["build", "--tol-override", "nope=1"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_needs_a_built_profile() {
    let (_dir, cfg, out) = setup(CAO2D);
    assert_eq!(gkrs(&["verify"], &cfg, &out).status.code(), Some(2));
}

#[test]
fn build_writes_cao_coefficients_and_verify_passes() {
    let (_dir, cfg, out) = setup(CAO2D);
    let o = gkrs(&["build"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("profile.txt")).unwrap();
    let line = text.lines().find(|l| l.starts_with("profile")).unwrap();
    let coeffs: Vec<f64> = line
        .split(';')
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(coeffs.len(), 2);
    assert!((coeffs[0] + 1.0).abs() < 1e-12);
    assert!((coeffs[1] - (1.0 - (-2.0_f64).exp())).abs() < 1e-12);
    assert_eq!(json(&out.join("admissibility.json"))["admissible"], Value::Bool(true));

    let o = gkrs(&["verify"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(json(&out.join("verification.json"))["all_pass"], Value::Bool(true));
}

#[test]
fn tampered_profile_fails_verification() {
    let (_dir, cfg, out) = setup(CAO2D);
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(0));
    let path = out.join("profile.txt");
    let text = fs::read_to_string(&path).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("profile") {
                let (head, tail) = l.split_once(';').unwrap();
                let mut c: Vec<f64> = tail.split_whitespace().map(|t| t.parse().unwrap()).collect();
                c[1] += 1e-3;
                let c: Vec<String> = c.iter().map(|v| format!("{v:.16e}")).collect();
                format!("{head}; {}", c.join(" "))
            } else {
                l.to_string()
            }
        })
        .collect();
    fs::write(&path, tampered.join("\n") + "\n").unwrap();
    assert_eq!(gkrs(&["verify"], &cfg, &out).status.code(), Some(1));
}

#[test]
fn negative_parameter_builds_with_incompleteness_flag() {
    let (_dir, cfg, out) = setup(&CAO2D.replace("\"a\": 1.0", "\"a\": -0.5"));
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(0));
    assert_eq!(
        json(&out.join("admissibility.json"))["incomplete_expected"],
        Value::Bool(true)
    );
}

#[test]
fn flat_taub_nut_is_ricci_flat() {
    let (_dir, cfg, out) = setup(TN2D_FLAT);
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(0));
    assert_eq!(json(&out.join("admissibility.json"))["ricci_flat"], Value::Bool(true));
    assert_eq!(gkrs(&["curvature"], &cfg, &out).status.code(), Some(0));
    let c = json(&out.join("curvature.json"));
    assert!(c["ricci_norm_max"].as_f64().unwrap() < 1e-5);
    let csv = fs::read_to_string(out.join("curvature.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("ricci_norm"));
}

#[test]
fn taub_nut_volume_grows_cubically() {
    let (_dir, cfg, out) = setup(TN2D_FLAT);
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(0));
    assert_eq!(gkrs(&["volume"], &cfg, &out).status.code(), Some(0));
    let v = json(&out.join("volume.json"));
    assert!((v["volume"]["fit"]["exponent"].as_f64().unwrap() - 3.0).abs() < 0.1);
}

#[test]
fn scan_finds_positive_sectional_curvature() {
    let (_dir, cfg, out) = setup(CAO2D);
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(0));
    let o = gkrs(&["scan"], &cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("scan.json"));
    assert!(s["sectional_min"].as_f64().unwrap() > 0.0);
    assert_eq!(s["positivity"]["all_positive"], Value::Bool(true));
}

#[test]
fn scan_rejects_other_families() {
    let (_dir, cfg, out) = setup(TN2D_FLAT);
    assert_eq!(gkrs(&["build"], &cfg, &out).status.code(), Some(0));
    assert_eq!(gkrs(&["scan"], &cfg, &out).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let (_dir, cfg, out) = setup(CAO2D);
    let other = out.with_file_name("again");
    for dir in [&out, &other] {
        assert_eq!(gkrs(&["build"], &cfg, dir).status.code(), Some(0));
        assert_eq!(gkrs(&["verify"], &cfg, dir).status.code(), Some(0));
        assert_eq!(gkrs(&["curvature"], &cfg, dir).status.code(), Some(0));
    }
    for name in [
        "profile.txt",
        "admissibility.json",
        "verification.json",
        "curvature.json",
        "curvature.csv",
    ] {
        assert_eq!(
            fs::read(out.join(name)).unwrap(),
            fs::read(other.join(name)).unwrap(),
            "{name}"
        );
    }
}
