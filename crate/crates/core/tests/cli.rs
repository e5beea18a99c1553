use std::process::{Command, Output};

use serde_json::Value;

fn eqbif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqbif")).args(args).output().expect("binary runs")
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn levels_json_is_byte_identical_across_runs() {
    let args = ["levels", "--potential", "so2-ring", "--domain", "sphere", "--dim", "3", "--beta-cutoff", "12"];
    let (a, b) = (eqbif(&args), eqbif(&args));
    assert_eq!(a.stdout, b.stdout);
    let v = json_out(&a);
    assert_eq!(v["levels"], serde_json::json!([2.0, 6.0, 12.0]));
    assert_eq!(v["seed"], 0);
}

#[test]
fn verify_degenerate_ring_reports_nothing() {
    let v = json_out(&eqbif(&[
        "verify", "--potential", "so2-ring-degenerate", "--domain", "sphere", "--dim", "2", "--window", "0.1:20",
    ]));
    assert_eq!(v["verdict"], "no predicted levels; no detected branches");
}

#[test]
fn verify_writes_branch_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let v = json_out(&eqbif(&[
        "verify",
        "--potential",
        "pitchfork-scalar",
        "--window",
        "0.5:4.5",
        "--out",
        out.to_str().unwrap(),
    ]));
    assert_eq!(v["verdict"], "CONSISTENT");
    let csv = std::fs::read_to_string(out.join("branch_1.csv")).unwrap();
    assert!(csv.starts_with("lambda,sup_norm,residual_norm,min_offsym_singular\n"));
    assert!(csv.lines().count() > 5);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report, v);
    assert!(out.join("branch_2.json").exists());
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    std::fs::write(
        &cfg,
        "[run]\ndomain = sphere\ndim = 2\nbeta-cutoff = 30\n\n[potential]\nname = quartic\np = 1\nA = 2\nF = lambda*u1^2 - u1^4/4\n",
    )
    .unwrap();
    let v = json_out(&eqbif(&["levels", "--config", cfg.to_str().unwrap(), "--beta-cutoff", "10"]));
    assert_eq!(v["potential"], "quartic");
    assert_eq!(v["levels"], serde_json::json!([0.5, 2.0, 4.5]));
}

#[test]
fn potential_file_is_loaded() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pot.ini");
    std::fs::write(&f, "[potential]\np = 1\nA = -1\nF = -lambda*u1^2/2 - u1^4/4\n").unwrap();
    let v = json_out(&eqbif(&["levels", "--potential-file", f.to_str().unwrap(), "--beta-cutoff", "4"]));
    assert_eq!(v["levels"], serde_json::json!([-4.0, -1.0]));
}

#[test]
fn errors_are_json_with_exit_codes() {
    let bad = eqbif(&["spectrum", "--domain", "ball", "--dim", "9"]);
    assert_eq!(bad.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert!(e["message"].as_str().unwrap().contains('9'));
    let not_level = eqbif(&["jump", "--potential", "pitchfork-scalar", "--lambda0", "2"]);
    assert_eq!(not_level.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&not_level.stderr).unwrap();
    assert_eq!(e["error"], "not-a-level");
    assert_eq!(eqbif(&["levels", "--window", "oops"]).status.code(), Some(2));
}

#[test]
fn euler_reads_requests_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("req.json");
    std::fs::write(
        &f,
        r#"{"op":"star","a":{"context":"B","coefficients":{"e":1}},"b":{"context":"B","coefficients":{"e":1}},
            "table":{"context":"B","labels":["G","e"],"products":{"e|e":{"e":2}}}}"#,
    )
    .unwrap();
    let v = json_out(&eqbif(&["euler", "--input", f.to_str().unwrap()]));
    assert_eq!(v["result"]["coefficients"]["e"], 2);
    std::fs::write(&f, r#"{"op":"product_decision","b_plus":0,"b_minus":2,"degree":{"kind":"exact","value":{"context":"B","coefficients":{"G":1}}},"side":"AtomOnPlus"}"#).unwrap();
    assert_eq!(json_out(&eqbif(&["euler", "--input", f.to_str().unwrap()]))["result"], true);
}
