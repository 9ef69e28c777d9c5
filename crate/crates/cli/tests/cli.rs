use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_transfer-spectrum"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_reports_z_squared() {
    let out = run(&["spectrum", "--map", "z^2", "-N", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["N"], 16);
    assert_eq!(v["M"], 132);
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["config"]["k"], 7);
    let one = &v["eigenvalues"][0];
    assert!((one[0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(v["max_match_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["spectrum", "--mu", "0.3+0.2i", "-N", "12", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_file_and_matrix_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let direct = dir.path().join("direct.csv");
    let adjoint = dir.path().join("adjoint.csv");
    let out = run(&[
        "spectrum",
        "--mu",
        "0.5",
        "-N",
        "4",
        "--out",
        report.to_str().unwrap(),
        "--dump-matrix",
        direct.to_str().unwrap(),
        "--dump-adjoint",
        adjoint.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["N"], 4);
    let csv = std::fs::read_to_string(&direct).unwrap();
    assert!(csv.starts_with("# "));
    assert_eq!(csv.lines().count(), 1 + 9);
    assert!(std::fs::read_to_string(&adjoint).unwrap().contains("block=adjoint"));
}

#[test]
fn map_from_file_and_inline_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("map.json");
    let json = r#"{"zeros": [[0, 0], [0, 0], [0.3, 0]], "constant": [1, 0]}"#;
    std::fs::write(&path, json).unwrap();
    let a = run(&["spectrum", "--file", path.to_str().unwrap(), "-N", "8"]);
    let b = run(&["spectrum", "--map", json, "-N", "8"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout_json(&a)["eigenvalues"], stdout_json(&b)["eigenvalues"]);
}

#[test]
fn non_expanding_exits_2() {
    let out = run(&["spectrum", "--map", r#"{"zeros": [[0.99, 0], [0.99, 0]], "constant": [1, 0]}"#]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["error"]["kind"], "not_expanding");
}

#[test]
fn uncertified_annulus_exits_3() {
    let out = run(&["spectrum", "--mu", "0.9", "--annulus", "0.5,1.02", "-N", "8"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["error"]["kind"], "no_admissible_annulus");
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec!["spectrum"],
        vec!["spectrum", "--map", "z^2", "--mu", "0.5"],
        vec!["spectrum", "--map", "cos(z)"],
        vec!["spectrum", "--map", "z^2", "-N", "8", "-M", "10"],
        vec!["spectrum", "--map", "z^2", "--annulus", "2,3"],
        vec!["spectrum", "--map", "z^2", "--bogus"],
        vec!["converge", "--map", "z^2", "-N", "16"],
        vec!["spectrum", "--map", "z^2", "-N", "8,12"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_passes_on_mu_half() {
    let out = run(&["verify", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["trials"], 100);
}

#[test]
fn verify_at_n_2_exits_4_with_names() {
    let out = run(&["verify", "--mu", "0.5", "-N", "2"]);
    assert_eq!(out.status.code(), Some(4));
    let payload: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    let failed = payload["error"]["failed"].as_array().unwrap();
    assert!(failed.iter().any(|n| n == "trace"));
    assert!(failed.iter().any(|n| n == "spectrum_match"));
}

#[test]
fn converge_writes_csv_and_summary() {
    let out = run(&["converge", "--map", "z^2", "-N", "4,6,8,10"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("N,error\n4,"));
    assert_eq!(csv.lines().count(), 5);
    assert!(String::from_utf8(out.stderr).unwrap().contains("superexponential/floor"));

    let out = run(&["converge", "--map", r#"{"zeros": [[0.2, 0.1], [-0.1, 0.3]], "constant": [0, 1]}"#, "-N", "4,8,12,16"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("slope=-"));
}
