use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fieldgeom"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/scenarios").join(format!("{name}.json"))
}

fn run(task: &str, name: &str) -> Value {
    let out = bin().arg(task).arg("--spec").arg(scenario(name)).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn run_stdin(task: &str, doc: &str) -> Output {
    let mut child = bin()
        .args([task, "--spec", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(doc.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn rank_scenario() {
    let r = run("rank", "rank");
    assert_eq!(r["task"], "rank");
    assert_eq!(r["result"]["rank"], 2);
    assert_eq!(r["result"]["basis"], serde_json::json!(["t1 + t2", "t1*t2"]));
    assert_eq!(r["inputs"]["elems"][2], "t1");
}

#[test]
fn reconstruct_scenario() {
    let r = run("reconstruct", "reconstruct");
    assert_eq!(r["result"]["recovered"], serde_json::json!(["t2", "t2^2 + 1"]));
    assert_eq!(r["result"]["calibration"], "1");
    assert_eq!(r["result"]["dependent"][0]["matches_map"], true);
}

#[test]
fn plane_scenario() {
    let r = run("plane", "plane");
    assert_eq!(r["result"]["collinear"], true);
    assert_eq!(r["result"]["linearly_dependent"], true);
}

#[test]
fn config_desargues_and_logic_scenarios() {
    let r = run("config", "config");
    assert_eq!(r["result"]["j"]["direct"], true);
    assert_eq!(r["result"]["j"]["decomposition"], true);
    assert_eq!(r["result"]["mult"]["equals_acl_xy"], true);
    assert_eq!(r["result"]["psi"]["all_evaluable_pass"], true);

    let r = run("desargues", "desargues");
    let configs = r["result"]["configurations"].as_array().unwrap();
    assert_eq!(configs.len(), 2);
    assert!(configs.iter().all(|c| c["collinear"] == true));

    let r = run("logic", "logic");
    let row = &r["result"]["harness"]["rows"][0];
    assert_eq!((row["lower"].as_bool(), row["upper"].as_bool()), (Some(false), Some(true)));
}

#[test]
fn reports_are_reproducible() {
    let once = || {
        bin()
            .args(["desargues", "--seed", "9", "--spec"])
            .arg(scenario("desargues"))
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(once(), once());
}

#[test]
fn report_written_to_file() {
    let path = std::env::temp_dir().join(format!("fieldgeom-rank-{}.json", std::process::id()));
    let out = bin().arg("rank").arg("--spec").arg(scenario("rank")).arg("--out").arg(&path).output().unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["rank"], 2);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn exit_codes() {
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(run_stdin("rank", "{\"task\": \"rank\"")), 2);
    assert_eq!(code(run_stdin("rank", r#"{"spec": {"nvars": 2}, "task": "rank", "inputs": {"elems": ["t1+"]}}"#)), 2);
    assert_eq!(code(run_stdin("rank", r#"{"spec": {"nvars": 2}, "task": "plane", "inputs": {}}"#)), 2);
    assert_eq!(
        code(run_stdin("config", r#"{"spec": {"nvars": 3}, "task": "config", "inputs": {"j": {"x": "t1", "a": "t1"}}}"#)),
        3
    );
    assert_eq!(
        code(run_stdin(
            "reconstruct",
            r#"{"spec": {"nvars": 4}, "task": "reconstruct", "inputs": {"automorphism": "identity", "samples": ["t1"]}}"#
        )),
        3
    );
    assert_eq!(code(bin().arg("rank").output().unwrap()), 2);
}

#[test]
fn injected_fault_is_named() {
    let out = bin().args(["selftest", "--seed", "1", "--inject-fault", "planes.desargues"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("FAIL [4] planes.desargues"), "{err}");
    assert!(err.contains("violated"));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], false);

    let out = bin().args(["selftest", "--inject-fault", "no.such.family"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
