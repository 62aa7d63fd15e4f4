use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn srbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    srbench(args).status.code().expect("exit code")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(code(&["bogus"]), 2);
    assert_eq!(code(&["dist", "--budget", "0"]), 2);
    assert_eq!(code(&["dist", "--algebra", "/no/such/spec.json"]), 2);
    assert_eq!(code(&["dist", "--element", "probe:99"]), 2);
    assert_eq!(code(&["parse", "--formula", "sup x. norm(x"]), 2);
    assert_eq!(code(&["verify-lemmas", "--suites", "nope"]), 2);
    assert_eq!(code(&["kk", "--first", "diag:2", "--second", "diag:3"]), 3);
}

#[test]
fn witness_without_obstruction_exits_3() {
    let out = srbench(&["witness", "--algebra", "m2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invariant violated"));
}

#[test]
fn verify_lemmas_counts_match() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lemmas.json");
    let args = ["verify-lemmas", "--instances", "40", "--seed", "42", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    let r = report(&out);
    assert_eq!(r["result"]["all_passed"], Value::Bool(true));
    for s in r["result"]["suites"].as_array().unwrap() {
        assert_eq!(s["passed"], s["instances"]);
        assert_eq!(s["instances"], 40);
    }
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn disk_distance_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dist.json");
    assert_eq!(code(&["dist", "--algebra", "disk", "--mesh-res", "64", "--out", out.to_str().unwrap()]), 0);
    let cert = &report(&out)["result"]["certificate"];
    assert!(cert["lower"].as_f64().unwrap() >= 0.9);
    assert!(cert["upper"].as_f64().unwrap() <= 1.0 + 1e-6);
    assert_eq!(cert["lower_method"], "winding");
}

#[test]
fn spec_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let alg = dir.path().join("alg.json");
    std::fs::write(&alg, r#"{"kind": "direct_sum", "blocks": [1, 2]}"#).unwrap();
    let out = dir.path().join("sr.csv");
    let args = ["sr", "--algebra", alg.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("algebra,n,lower,upper,sr\n"));
    assert!(csv.trim_end().ends_with(",1"));

    let sub = dir.path().join("sub.json");
    let doc = srbench::kk::Subalgebra::diagonal(2).unwrap().to_doc();
    std::fs::write(&sub, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = dir.path().join("kk.json");
    let args = ["kk", "--first", sub.to_str().unwrap(), "--second", "full:2", "--out", out.to_str().unwrap()];
    assert_eq!(code(&args), 0);
    assert!(report(&out)["result"]["certificate"]["lower"].as_f64().unwrap() >= 0.99);
}

#[test]
fn parse_round_trips() {
    let out = srbench(&["parse", "--formula", "inf y : posball1(A) .  norm( sub(y , one))"]);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["round_trip"], Value::Bool(true));
    assert_eq!(r["result"]["canonical"], "inf y:posball1(A). norm(sub(y, one))");
}

#[test]
fn reports_repeat_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let args = ["phi", "--algebra", "m3", "--seed", "9", "--budget", "8", "--out", p.to_str().unwrap()];
        assert_eq!(code(&args), 0);
        let mut v = report(&p);
        v.as_object_mut().unwrap().remove("timestamp");
        v
    };
    assert_eq!(run("a.json"), run("b.json"));
}
