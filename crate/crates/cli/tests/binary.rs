use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_convexcyclic"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn successful_run_prints_json_report() {
    let out = run(&["classify", "--preset", "diag-2i-minus-2i"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["results"]["kind"], "classify");
    assert_eq!(report["results"]["verdict"], "CriterionPassesWithCaveat");
}

#[test]
fn csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("probe.csv");
    let out = run(&[
        "probe",
        "--preset",
        "diag-2i-minus-2i",
        "--N",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,value,running_max\n0,1,1\n"));
}

#[test]
fn run_subcommand_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(
        &path,
        r#"{"command":"approx","operator":{"type":"diagonal","entries":[[0,2]]},"seed_vector":[1],"parameters":{"N":64,"target":[0]}}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["results"]["distance"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn config_error_exits_two() {
    let out = run(&["epsilon", "--preset", "diag-2i-minus-2i", "--eps", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn numerical_error_exits_three() {
    let out = run(&["orbit", "--preset", "diag-2i-minus-2i", "--N", "2000"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn oracle_miss_exits_four() {
    let out = run(&[
        "epsilon",
        "--spec",
        r#"{"type":"identity","dim":2}"#,
        "--seed-vector",
        "[1,0]",
        "--target",
        "[0,1]",
        "--eps",
        "0.5",
        "--delta",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unreadable_output_path_exits_one() {
    let out = run(&[
        "preset",
        "--preset",
        "diag-2i-minus-2i",
        "--out",
        "/nonexistent/dir/report.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
