use std::path::Path;
use std::process::Command;

use lamsep_cli::{parse_config, run, Overrides, Results};
use tempfile::tempdir;

const UNIT: [&str; 8] = ["--alpha1", "1", "--alpha2", "1", "--nu", "1", "--delta", "1"];

fn lamsep(args: &[&str], out: &Path) -> (i32, String, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_lamsep"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p.display().to_string()
}

#[test]
fn theorem1_default_run_exits_zero() {
    let d = tempdir().unwrap();
    let (code, out, err) = lamsep(&[&["verify-theorem1"], &UNIT[..]].concat(), d.path());
    assert_eq!(code, 0, "{out}{err}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert!(report["results"]["data"]["min_mismatch"].as_f64().unwrap() > 0.0);
    let csv = std::fs::read_to_string(d.path().join("data.csv")).unwrap();
    assert!(csv.starts_with("r,lhs,rhs,M,ratio\n"));
}

#[test]
fn theorem2_disagreement_exits_two() {
    let d = tempdir().unwrap();
    let (code, _, _) = lamsep(&[&["verify-theorem2"], &UNIT[..]].concat(), d.path());
    assert_eq!(code, 2);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(d.path().join("report.json")).unwrap()).unwrap();
    let t = &report["results"]["data"];
    assert_eq!(t["agrees_with"], "oracle");
    assert_eq!(t["paper_value"].as_f64().unwrap(), -2.0);
    assert!((t["oracle_value"].as_f64().unwrap() + 3.0).abs() < 1e-9);
    assert_eq!(report["errata"]["advection_variant"], "corrected");
}

#[test]
fn classify_laminar_is_parallel() {
    let d = tempdir().unwrap();
    let (code, out, _) = lamsep(&[&["classify"], &UNIT[..]].concat(), d.path());
    assert_eq!(code, 0);
    assert!(out.contains("Parallel"));
}

#[test]
fn errors_exit_one() {
    let d = tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"alpha1": 1, "alpha2": 1, "nu": 1, "delta": 1, "alpha3": 0}"#);
    let (code, _, err) = lamsep(&["verify-theorem2", "--config", &cfg], &d.path().join("o"));
    assert_eq!(code, 1);
    assert!(err.contains("alpha3"), "{err}");
    let (code, _, err) = lamsep(&["verify-theorem1", "--alpha1", "1", "--alpha2", "-1", "--nu", "1", "--delta", "1"], d.path());
    assert_eq!(code, 1);
    assert!(err.contains("alpha2"), "{err}");
}

#[test]
fn flags_override_file_values() {
    let d = tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"alpha1": 1, "alpha2": 1, "nu": 5, "delta": 1}"#);
    let c = parse_config(
        Some(Path::new(&cfg)),
        &Overrides {
            nu: Some(2.0),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(c.nu, Some(2.0));
}

#[test]
fn sweep_is_monotone_in_curvature_and_linear_in_viscosity() {
    let d = tempdir().unwrap();
    let path = write_config(
        d.path(),
        &format!(
            r#"{{"command": "sweep", "alpha1": 1, "alpha2": 1, "nu": 1, "delta": 1,
                "sweep_delta": [0.5, 1, 2], "sweep_nu": [1, 2], "out": "{}"}}"#,
            d.path().join("o").display()
        ),
    );
    let cfg = parse_config(Some(Path::new(&path)), &Overrides::default()).unwrap();
    let rep = run(&cfg).unwrap();
    assert_eq!(rep.exit_code(), 2);
    let Results::Sweep(rows) = rep.results else { panic!() };
    assert_eq!(rows.len(), 6);
    let at = |delta: f64, nu: f64| rows.iter().find(|r| r.delta == delta && r.nu == nu).unwrap().limit_extrapolated;
    assert!(at(0.5, 1.0).abs() > at(1.0, 1.0).abs() && at(1.0, 1.0).abs() > at(2.0, 1.0).abs());
    for delta in [0.5, 1.0, 2.0] {
        assert!((at(delta, 2.0) / at(delta, 1.0) - 2.0).abs() < 1e-6);
    }
}

#[test]
fn simulate_writes_series_and_field() {
    let d = tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"n_s": 32, "n_r": 16, "t_end": 2e-4, "write_field": true}"#);
    let (code, out, err) = lamsep(&[&["simulate", "--config", &cfg], &UNIT[..]].concat(), d.path());
    assert_eq!(code, 0, "{out}{err}");
    let series = std::fs::read_to_string(d.path().join("data.csv")).unwrap();
    assert!(series.starts_with("t,probe_r,u_t,ratio\n"));
    let field = std::fs::read_to_string(d.path().join("field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 32 * 16);
}

#[test]
fn repeated_runs_give_identical_data() {
    let d = tempdir().unwrap();
    let cfg = write_config(d.path(), r#"{"sweep_delta": [0.5, 1, 2], "sweep_alpha1": [1, 2]}"#);
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    lamsep(&[&["sweep", "--config", &cfg], &UNIT[..]].concat(), &a);
    lamsep(&[&["sweep", "--config", &cfg], &UNIT[..]].concat(), &b);
    assert_eq!(std::fs::read(a.join("data.csv")).unwrap(), std::fs::read(b.join("data.csv")).unwrap());
}
