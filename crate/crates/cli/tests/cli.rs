use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convex-energy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn verify_simplex_extremizer() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "in.json", r#"{"function": {"kind": "extremizer_simplex", "n": 2}}"#);
    let out = run(&["verify", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    let ratio = v["report"]["ratio"].as_f64().unwrap();
    assert!((ratio - 8.0 / 27.0).abs() <= 1e-9, "{ratio}");
}

#[test]
fn verify_output_reingests_to_identical_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "in.json",
        r#"{"polytope": {"dim": 2, "vertices": [[0,0],[2,0],[2,1],[0,1]]},
            "function": {"kind": "maxaffine", "pieces": [{"a": [1, 0], "b": -0.5}, {"a": [-1, 2], "b": 0.1}]}}"#,
    );
    let first = dir.path().join("first.json");
    let out = run(&["verify", "--input", &input, "--output", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--input", first.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let a: Value = serde_json::from_str(&fs::read_to_string(&first).unwrap()).unwrap();
    assert_eq!(a["report"], json_of(&out)["report"]);
}

#[test]
fn verify_constant_function() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "in.json",
        r#"{"polytope": {"dim": 1, "vertices": [[0],[1]]},
            "function": {"kind": "maxaffine", "pieces": [{"a": [0], "b": 3}]}}"#,
    );
    let out = run(&["verify", "--input", &input, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let col = rows[0].iter().position(|h| h == "ratio").unwrap();
    assert_eq!(rows[1][col], "constant");
}

#[test]
fn verify_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let degenerate = write(
        dir.path(),
        "flat.json",
        r#"{"polytope": {"dim": 2, "vertices": [[0,0],[1,1],[2,2]]},
            "function": {"kind": "maxaffine", "pieces": [{"a": [1, 0], "b": 0}]}}"#,
    );
    assert_eq!(run(&["verify", "--input", &degenerate]).status.code(), Some(1));

    let unknown = write(dir.path(), "extra.json", r#"{"function": {"kind": "extremizer_simplex", "n": 1}, "colour": 1}"#);
    let out = run(&["verify", "--input", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    assert_eq!(run(&["verify", "--input", "/nonexistent/in.json"]).status.code(), Some(1));
    assert_eq!(run(&["verify", "--input", &unknown, "--tol", "-1"]).status.code(), Some(1));
}

#[test]
fn extremal_table() {
    let out = run(&["extremal", "--n-max", "3", "--m-max", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_of(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for row in rows.iter().filter(|r| r["kind"] == "simplex") {
        let (ratio, bound) = (row["ratio"].as_f64().unwrap(), row["bound"].as_f64().unwrap());
        assert!((ratio - bound).abs() <= 1e-9);
    }
    let steep: Vec<f64> = rows
        .iter()
        .filter(|r| r["kind"] == "steep" && r["n"] == 1)
        .map(|r| r["ratio"].as_f64().unwrap())
        .collect();
    assert_eq!(steep.len(), 3);
    assert!(steep.windows(2).all(|w| w[0] < w[1] && w[1] < 2.0));

    let out = run(&["extremal", "--n-max", "1", "--m-max", "1"]);
    let rows = json_of(&out);
    assert!((rows[0]["ratio"].as_f64().unwrap() - 0.5).abs() <= 1e-12);

    let out = run(&["extremal", "--n-max", "0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&String::from_utf8(out.stdout).unwrap()).len(), 1);
}

#[test]
fn scan_is_deterministic() {
    let args = ["scan", "--seed", "0", "--count", "500", "--dim", "2", "--format", "csv"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(first.stdout.clone()).unwrap());
    assert_eq!(rows.len(), 501);
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);

    assert_eq!(run(&["scan", "--dim", "0"]).status.code(), Some(1));
}

#[test]
fn toric_fixture_checks() {
    let out = run(&["toric", "--fixture", "P1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_of(&out);
    let rows = rows.as_array().unwrap();
    assert!(rows.iter().any(|r| r["check"].as_str().unwrap().starts_with("rooftop")));
    assert!(rows.iter().all(|r| r["pass"] == true));

    let out = run(&["toric", "--fixture", "P7"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ray_suite_and_input() {
    let out = run(&["ray", "--m-max", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_of(&out);
    for row in rows.as_array().unwrap().iter().filter(|r| r["label"].as_str().unwrap().contains("simplex")) {
        let report = &row["report"];
        let (ratio, lower) = (report["ratio"].as_f64().unwrap(), report["lower"].as_f64().unwrap());
        assert!((ratio - lower).abs() <= 1e-9, "{row}");
    }

    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "ray.json",
        r#"{"fixture": "P1xP1", "direction": {"kind": "maxaffine", "pieces": [{"a": [1, 0], "b": -0.75}, {"a": [-1, 0], "b": 0.25}]}}"#,
    );
    let out = run(&["ray", "--input", &input, "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(csv_rows(&String::from_utf8(out.stdout).unwrap()).len(), 2);
}
