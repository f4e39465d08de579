use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tangency-lab"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn tangency-lab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const CONTACT_GRID: &str = r#"
version = 1
name = "contact-grid"
n = 3
k = 2
checks = ["frobenius"]

[distribution]
forms = [[{ dx = [3], coeff = "1" }, { dx = [1], coeff = "-x2" }]]

[frobenius]
lower = [-1, -1, -1]
upper = [1, 1, 1]
count = 3
expect = "involutive"
"#;

#[test]
fn passing_run_writes_json_to_stdout() {
    let path = scenario("foliation.toml");
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["scenario"], "foliation");
    assert_eq!(json["checks"][0]["check"], "frobenius");
    assert_eq!(json["checks"][0]["verdict"], "PASS");
}

#[test]
fn failing_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("contact.toml");
    std::fs::write(&path, CONTACT_GRID).unwrap();
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["checks"][0]["verdict"], "FAIL");
}

#[test]
fn usage_and_parse_errors_exit_two() {
    let missing = run(&["run", "/nonexistent/scenario.toml"]);
    assert_eq!(code(&missing), 2);

    let path = scenario("foliation.toml");
    let path = path.to_str().unwrap();
    assert_eq!(code(&run(&["run", path, "--format", "xml"])), 2);
    assert_eq!(code(&run(&["run", path, "--check", "nonsense"])), 2);
    assert_eq!(code(&run(&["run", path, "--tol", "-1"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);

    // stokes needs a mesh the foliation scenario does not have
    let out = run(&["run", path, "--check", "stokes"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh required for checks {stokes}"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "version = 1\nn = 3\nk = \n").unwrap();
    let out = run(&["run", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn csv_output_to_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.csv");
    let path = scenario("flat-square.toml");
    let out = run(&[
        "run",
        path.to_str().unwrap(),
        "--check",
        "stokes",
        "--check",
        "frobenius",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
        "--seed",
        "3",
        "--depth",
        "8",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(tangency_core::harness::CSV_HEADER));
    let checks: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    let first_frobenius = checks.iter().position(|c| *c == "frobenius").unwrap();
    assert!(checks[..first_frobenius].iter().all(|c| *c == "stokes"));
    assert!(checks.iter().all(|c| *c == "stokes" || *c == "frobenius"));
}

#[test]
fn seed_override_is_recorded() {
    let path = scenario("foliation.toml");
    let out = run(&["run", path.to_str().unwrap(), "--seed", "42"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["seed"], 42);
}
