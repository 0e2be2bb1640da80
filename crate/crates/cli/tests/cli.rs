use std::path::Path;
use std::process::{Command, Output};

use spinorbit_cli::{ingest_csv_str, ingest_json_str};

fn spinorbit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinorbit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("timestamp"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn preset_plain_table_layout() {
    let out = spinorbit(&["preset", "chsh-nonseparable"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for label in ["M(α1,β1)", "M(α1,β2)", "M(α2,β1)", "M(α2,β2)", "S_KD2", "2(1+Δ₀)"] {
        assert!(text.contains(label), "missing {label}");
    }
    assert!(text.lines().any(|l| l.starts_with("S ") && l.ends_with("2.82843")));
    assert!(text.contains("margin 0.828427") && text.contains("Δ₀ = 0.00000"));
    assert!(text.contains("timestamp: ") && text.contains("tool: spinorbit"));
}

#[test]
fn separable_preset_reports_noncontextual() {
    let text = stdout(&spinorbit(&["preset", "kd-separable"]));
    assert!(text.contains("contextuality: noncontextual"));
    assert!(text.contains("multimaximal coupling: exists"));
    assert!(text.lines().any(|l| l.starts_with("M(α1,β2)") && l.ends_with("0.00000")));
}

#[test]
fn reports_are_deterministic_apart_from_the_timestamp() {
    for format in ["plain", "csv", "json"] {
        let a = stdout(&spinorbit(&["simulate", "--mode", "0.6,0.1i,0,0.8", "--visibility", "0.9", "--crosstalk", "0.03", "--format", format]));
        let b = stdout(&spinorbit(&["simulate", "--mode", "0.6,0.1i,0,0.8", "--visibility", "0.9", "--crosstalk", "0.03", "--format", format]));
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{format}");
    }
}

#[test]
fn csv_and_json_output_reingest_and_reanalyze() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--mode", "phi-minus", "--visibility", "b1=0.95,b2=0.8", "--crosstalk", "0.1"];
    let direct: serde_json::Value =
        serde_json::from_str(&stdout(&spinorbit(&[&args[..], &["--format", "json"]].concat()))).unwrap();

    let csv = stdout(&spinorbit(&[&args[..], &["--format", "csv"]].concat()));
    assert!(ingest_csv_str(&csv).unwrap().is_complete());
    let csv_path = write(dir.path(), "run.csv", &csv);
    let json_path = write(dir.path(), "run.json", &serde_json::to_string(&direct).unwrap());

    for path in [csv_path, json_path] {
        let out = spinorbit(&["analyze", &path, "--format", "json"]);
        assert_eq!(out.status.code(), Some(0));
        let again: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        for key in ["s_chsh", "delta0", "kd_bound"] {
            let (x, y) = (direct[key].as_f64().unwrap(), again[key].as_f64().unwrap());
            assert!((x - y).abs() < 1e-9, "{key}: {x} vs {y}");
        }
        for k in 0..4 {
            let (x, y) = (direct["s_kd"][k].as_f64().unwrap(), again["s_kd"][k].as_f64().unwrap());
            assert!((x - y).abs() < 1e-9);
        }
        assert_eq!(direct["verdicts"], again["verdicts"]);
    }
}

#[test]
fn json_schema_keys() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&spinorbit(&["preset", "kd-nonseparable", "--format", "json"]))).unwrap();
    assert_eq!(v["s_kd"].as_array().unwrap().len(), 4);
    for key in ["s_chsh", "delta0", "kd_bound", "margin", "table", "provenance"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert_eq!(v["verdicts"]["contextual"], true);
    assert_eq!(v["verdicts"]["coupling_exists"], false);
    assert_eq!(v["verdicts"]["oracle_agrees"], true);
    assert!(ingest_json_str(&v.to_string()).unwrap().is_complete());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(spinorbit(&["preset", "bogus"]).status.code(), Some(2));
    assert_eq!(spinorbit(&["simulate", "--visibility", "1.5"]).status.code(), Some(2));
    assert_eq!(spinorbit(&["simulate", "--tol-decision", "0"]).status.code(), Some(2));
    assert_eq!(spinorbit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(spinorbit(&["analyze", "/nonexistent/table.csv"]).status.code(), Some(3));

    let bad = write(dir.path(), "bad.csv", "alpha_rad,beta_rad,i_pp,i_pm,i_mp,i_mm\n0,0,-1,0,0,1\n");
    let out = spinorbit(&["analyze", &bad]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2") && err.contains("i_pp"), "{err}");

    let short = write(
        dir.path(),
        "short.csv",
        "alpha_rad,beta_rad,i_pp,i_pm,i_mp,i_mm\n0,0,1,0,0,1\n0,1,1,0,0,1\n1,0,1,0,0,1\n",
    );
    assert_eq!(spinorbit(&["oracle", &short]).status.code(), Some(3));
}

#[test]
fn noncontextual_verdicts_still_exit_zero() {
    let out = spinorbit(&["simulate", "--mode", "hh"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("noncontextual"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.conf", "# test run\nmode = hh\nformat = json\nvisibility = 0.5\n");
    let v: serde_json::Value = serde_json::from_str(&stdout(&spinorbit(&["simulate", "--config", &cfg]))).unwrap();
    assert_eq!(v["provenance"]["config"]["mode"], "hh");
    assert_eq!(v["provenance"]["config"]["visibility"], "b1=0.5,b2=0.5");

    let v: serde_json::Value =
        serde_json::from_str(&stdout(&spinorbit(&["simulate", "--config", &cfg, "--mode", "psi-minus"]))).unwrap();
    assert_eq!(v["provenance"]["config"]["mode"], "psi-minus");
    let s = v["s_chsh"].as_f64().unwrap();
    assert!((s - 2f64.sqrt()).abs() < 1e-12, "{s}");

    let bad = write(dir.path(), "bad.conf", "loudness = 11\n");
    assert_eq!(spinorbit(&["simulate", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn degree_angles_match_radian_angles() {
    let deg = stdout(&spinorbit(&["simulate", "--degrees", "--angles", "22.5,67.5,0,45", "--format", "csv"]));
    let rad = stdout(&spinorbit(&["simulate", "--format", "csv"]));
    let rows = |t: &str| t.lines().filter(|l| !l.starts_with('#')).map(String::from).collect::<Vec<_>>();
    let (d, r) = (ingest_csv_str(&deg).unwrap(), ingest_csv_str(&rad).unwrap());
    for (x, y) in d.angles().as_array().iter().zip(r.angles().as_array()) {
        assert!((x - y).abs() < 1e-15);
    }
    assert_eq!(rows(&deg).len(), rows(&rad).len());
}

#[test]
fn oracle_subcommand_formats() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&spinorbit(&["preset", "kd-nonseparable", "--format", "csv"]));
    let path = write(dir.path(), "psi.csv", &csv);
    let plain = stdout(&spinorbit(&["oracle", &path]));
    assert!(plain.contains("multimaximal coupling: does not exist"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&spinorbit(&["oracle", &path, "--format", "json"]))).unwrap();
    assert_eq!(v["contextual"], true);
    assert_eq!(v["agree"], true);
    assert!(v["witness"].is_null());
}

#[test]
fn sweeps() {
    let out = spinorbit(&["sweep", "visibility", "--steps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 26);
    assert!(text.contains("# best_fit: "));

    let a = stdout(&spinorbit(&["sweep", "random", "--count", "40", "--seed", "3"]));
    let b = stdout(&spinorbit(&["sweep", "random", "--count", "40", "--seed", "3"]));
    assert_eq!(a, b);
    assert!(a.contains("tables: 40"));

    let out = spinorbit(&["sweep", "angle", "--which", "b2", "--from", "-1", "--to", "1", "--steps", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 3);
    assert_eq!(spinorbit(&["sweep", "angle", "--which", "c3", "--from", "0", "--to", "1"]).status.code(), Some(2));
}
