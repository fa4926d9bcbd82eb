use std::process::Command;

use serde_json::Value;

fn armlift(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_armlift")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn last_row(csv: &str) -> Vec<f64> {
    csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect()
}

#[test]
fn census_reports() {
    let (code, out, _) = armlift(&["census", "4", "1.0"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["counts"], json(r#"{"1": 6}"#));
    assert_eq!(v["euler"], -6);
    let (_, out, _) = armlift(&["census", "4", "3.0"]);
    assert_eq!(json(&out)["counts"], json(r#"{"0": 4, "1": 6, "2": 4}"#));
}

#[test]
fn single_link_circle_lift() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let (code, out, err) = armlift(&[
        "lift",
        "--arm",
        r#"{"lengths": [1]}"#,
        "--curve",
        r#"{"segments": [{"type": "arc", "center": [0, 0], "radius": 1, "start_angle": 0, "end_angle": 1, "duration": 1}]}"#,
        "--q0",
        r#"{"angles": [0]}"#,
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let row = last_row(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(row[0], 1.0);
    assert!((row[1] - 1.0).abs() < 1e-8);
    assert!(json(&out)["max_tracking_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn constant_curve_keeps_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let (code, _, _) = armlift(&[
        "lift",
        "--arm",
        r#"{"lengths": [1, 1, 1]}"#,
        "--curve",
        r#"{"segments": [{"type": "polyline", "points": [[2, 0], [2, 0]], "times": [0, 0.5]}]}"#,
        "--q0",
        r#"{"angles": [0.0, 1.0471975511965976, -1.0471975511965976]}"#,
        "--h",
        "0.01",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 51);
    assert!(rows.iter().all(|r| r[1..4] == rows[0][1..4]));
}

#[test]
fn crossing_critical_radius_exits_two_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let (code, out, _) = armlift(&[
        "lift",
        "--arm",
        r#"{"lengths": [2, 1]}"#,
        "--curve",
        r#"{"segments": [{"type": "polyline", "points": [[2, 1], [0.5, 0]], "times": [0, 1]}]}"#,
        "--q0",
        r#"{"angles": [0, 1.5707963267948966]}"#,
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
    let v = json(&out);
    assert_eq!(v["error"], "near_critical");
    let steps = v["partial"]["steps"].as_u64().unwrap();
    assert!(steps > 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count() as u64, steps + 2);
}

#[test]
fn malformed_input_exits_one_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("never.csv");
    let (code, out, err) = armlift(&[
        "lift",
        "--arm",
        r#"{"lengths": [1, -1]}"#,
        "--curve",
        r#"{"segments": []}"#,
        "--q0",
        r#"{"angles": [0, 1]}"#,
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("invalid_input"));
    assert!(!csv.exists());
    let (code, _, _) = armlift(&["critical-radii", "--arm", "/does/not/exist.json"]);
    assert_eq!(code, 1);
}

#[test]
fn json_arguments_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let arm = dir.path().join("arm.json");
    std::fs::write(&arm, r#"{"lengths": [3, 1, 1], "dim": 2}"#).unwrap();
    let (code, out, _) = armlift(&["critical-radii", "--arm", arm.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["radii"], json("[1.0, 3.0, 5.0]"));
}

#[test]
fn reachable_and_invariants() {
    let arm = r#"{"lengths": [1, 1, 1]}"#;
    let z0 = r#"{"angles": [0.0, 2.0, 4.0]}"#;
    let flipped = r#"{"angles": [0.0, 4.0, 2.0]}"#;
    let (code, out, _) = armlift(&["reachable", "--arm", arm, "--z0", z0, "--z1", z0]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["verdict"], "yes");
    let (_, out, _) = armlift(&["reachable", "--arm", arm, "--z0", z0, "--z1", flipped]);
    assert_eq!(json(&out)["verdict"], "no");
    let (code, out, _) = armlift(&["invariants", "--arm", arm, "--config", z0]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["effector"].as_array().unwrap().len(), 2);
}

#[test]
fn holonomy_two_link_has_no_gamma() {
    let (code, out, _) = armlift(&[
        "holonomy",
        "--arm",
        r#"{"lengths": [1, 1]}"#,
        "--q",
        r#"{"angles": [0, 1.5707963267948966]}"#,
        "--side",
        "0.05",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["gamma_estimate"].is_null());
    assert_eq!(v["gamma_theory"], 1.0);
}

#[test]
fn holonomy_three_link_gamma() {
    let (code, out, _) = armlift(&[
        "holonomy",
        "--arm",
        r#"{"lengths": [1, 1, 1]}"#,
        "--q",
        r#"{"angles": [0.3, 1.9, -0.8]}"#,
        "--side",
        "0.05",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    let g = v["gamma_estimate"].as_f64().unwrap();
    let t = v["gamma_theory"].as_f64().unwrap();
    assert!((g - t).abs() < 0.05 * t.max(1.0), "{g} vs {t}");
}

#[test]
fn output_is_byte_identical() {
    let args = ["holonomy", "--arm", r#"{"lengths": [1, 2, 1.5]}"#, "--q", r#"{"angles": [0.2, 1.1, -2.0]}"#];
    assert_eq!(armlift(&args), armlift(&args));
}

#[test]
fn help_documents_schemas() {
    let (code, out, _) = armlift(&["--help"]);
    assert_eq!(code, 0);
    for word in ["square_loop", "vectors", "Exit codes", "critical-radii", "serve"] {
        assert!(out.contains(word), "{word}");
    }
}
