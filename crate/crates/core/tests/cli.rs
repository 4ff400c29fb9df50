use std::process::{Command, Output};

use serde_json::Value;

fn lnr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lnr"))
        .args(args)
        .env_remove("LNR_FORMAT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn bound_from_settings_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sym112.63.json");
    let emit = lnr(&["bound", "--symmetric", "112.63", "--emit-settings", path.to_str().unwrap()]);
    assert!(emit.status.success());

    let o = lnr(&["--format", "json", "bound", "--settings-file", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    for key in ["L", "extremal_angle_deg", "bound", "lhs", "S", "ratio", "degenerate"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!((v["L"].as_f64().unwrap() - 0.981_845_77).abs() < 1e-8);
    assert!((v["bound"].as_f64().unwrap() - 1.636_961_48).abs() < 1e-8);
    assert!((v["extremal_angle_deg"].as_f64().unwrap() - 112.63).abs() < 1e-9);
    assert_eq!(v["degenerate"], Value::Bool(false));
}

#[test]
fn emitted_settings_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    assert!(lnr(&["optimize", "--emit-settings", first.to_str().unwrap()]).status.success());
    assert!(lnr(&[
        "bound",
        "--settings-file",
        first.to_str().unwrap(),
        "--emit-settings",
        second.to_str().unwrap()
    ])
    .status
    .success());
    let read = |p: &std::path::Path| -> Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    };
    let (a, b) = (read(&first), read(&second));
    assert_eq!(a["category"], "I");
    for key in ["a", "b", "b2"] {
        let xs = a[key].as_array().unwrap().iter().flat_map(|v| v.as_array().unwrap().clone());
        let ys = b[key].as_array().unwrap().iter().flat_map(|v| v.as_array().unwrap().clone());
        for (x, y) in xs.zip(ys) {
            assert!((x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn json_and_csv_agree() {
    let args = ["violation", "--symmetric", "110", "--visibility", "0.99"];
    let j = json(&lnr(&[&["--format", "json"], &args[..]].concat()));
    let csv = stdout(&lnr(&[&["--format", "csv"], &args[..]].concat()));
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    for key in ["L", "extremal_angle_deg", "bound", "lhs", "S", "ratio"] {
        let i = header.iter().position(|h| *h == key).unwrap();
        let c: f64 = row[i].parse().unwrap();
        let v = j[key].as_f64().unwrap();
        assert_eq!(format!("{c:.11e}"), format!("{v:.11e}"), "{key}");
    }
}

#[test]
fn scan_csv_contract() {
    let o = lnr(&["--format", "csv", "scan", "--from", "90", "--to", "120", "--step", "0.25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "delta,lhs,bound,S");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    // 120° itself is a planar cone, so the last row sits just inside it.
    assert_eq!(rows.len(), 121);
    assert!(rows.iter().all(|r| r.len() == 4));
    assert_eq!(rows[0][0], 90.0);
    assert!(rows[120][0] < 120.0 && rows[120][0] > 119.999);
}

#[test]
fn scan_defaults_find_window() {
    let o = lnr(&["--format", "json", "scan"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let w = v["violation_window"].as_array().unwrap();
    assert!((w[0].as_f64().unwrap() - 106.8).abs() < 0.3);
    assert!((w[1].as_f64().unwrap() - 116.5).abs() < 0.3);
    assert_eq!(v["unit"], "deg");
}

#[test]
fn radians_flag_switches_units() {
    let deg = json(&lnr(&["--format", "json", "scan", "--from", "100", "--to", "115"]));
    let rad = json(&lnr(&[
        "--format",
        "json",
        "--radians",
        "scan",
        "--from",
        &100f64.to_radians().to_string(),
        "--to",
        &115f64.to_radians().to_string(),
        "--step",
        &0.25f64.to_radians().to_string(),
    ]));
    let d = deg["argmax_delta"].as_f64().unwrap();
    let r = rad["argmax_delta"].as_f64().unwrap();
    assert!((d.to_radians() - r).abs() < 1e-8);
}

#[test]
fn env_sets_default_format() {
    let o = Command::new(env!("CARGO_BIN_EXE_lnr"))
        .args(["bound", "--optimal-beta", "40"])
        .env("LNR_FORMAT", "json")
        .output()
        .unwrap();
    assert!(json(&o)["bound"].is_f64());
}

#[test]
fn exit_codes() {
    assert_eq!(lnr(&["bogus"]).status.code(), Some(2));
    assert_eq!(lnr(&["bound"]).status.code(), Some(2));
    assert_eq!(lnr(&["bound", "--settings-file", "/nonexistent.json"]).status.code(), Some(1));
    assert_eq!(
        lnr(&["bound", "--category", "I", "--a", "1,0,0;0,1,0;0,0,1", "--b", "1,0,0;0,1,0;0,0,1", "--b2", "1,0,0;0,1,0;0,0,1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        lnr(&["bound", "--category", "II", "--a", "1,0,0;0,1,0", "--b", "1,0,0;0,1,0;0,0,1"]).status.code(),
        Some(1)
    );
    assert_eq!(lnr(&["optimize", "--visibility", "0.5"]).status.code(), Some(1));
}

#[test]
fn hvcheck_reads_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(&path, "weight,A,B,B2\n0.5,1,1,-1\n0.5,-1,1,1\n").unwrap();
    let o = lnr(&["--format", "json", "hvcheck", "--table", path.to_str().unwrap()]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["holds"], Value::Bool(true));
    assert_eq!(v["subensemble"]["lhs_plus"].as_f64(), Some(1.0));

    std::fs::write(&path, "weight,A,B,B2\n0.5,1,1,-1\n").unwrap();
    assert_eq!(lnr(&["hvcheck", "--table", path.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn oracle_single_triple() {
    let o = lnr(&["--format", "json", "oracle", "--e1", "1,0,0", "--e2", "0,1,0", "--e3", "0,0,1"]);
    let v = json(&o);
    assert_eq!(v["L"].as_f64(), Some(1.0));
    assert!((v["l_est"].as_f64().unwrap() - 1.0).abs() < 5e-3);
    assert_eq!(v["agrees"], Value::Bool(true));
}

#[test]
fn robustness_defaults_to_optimal_settings() {
    let o = lnr(&["--format", "json", "robustness", "--epsilon", "0", "--samples", "10"]);
    let v = json(&o);
    assert!((v["nominal_S"].as_f64().unwrap() - 0.108).abs() < 1e-3);
    assert_eq!(v["conclusive_margin"], v["nominal_S"]);
}

#[test]
fn reproduce_below_thresholds() {
    let o = lnr(&["--format", "json", "reproduce", "--visibility", "0.97", "--oracle-triples", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    let window = rows.iter().find(|r| r["name"].as_str().unwrap().contains("window")).unwrap();
    assert!(window["computed"].as_array().unwrap().is_empty());

    let v = json(&lnr(&["--format", "json", "reproduce", "--visibility", "0.90", "--oracle-triples", "5"]));
    let s = v["rows"][0]["computed"][0].as_f64().unwrap();
    assert!(s < 0.0, "S = {s}");
}
