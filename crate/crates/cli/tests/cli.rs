use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rltsdp"))
}

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rltsdp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn check_reports_structure() {
    let ex2 = instance("example2.qp");
    let out = run(&["--json", "check", ex2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["poly_ok"], true);

    let ex3 = instance("example3.qp");
    let out = run(&["--json", "check", ex3.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["poly_ok"], false);
    assert_eq!(v["reasons"][0], "connected-plus-triplet {1,2,3}");

    let empty = temp_file("empty.qp", "n 1\n");
    assert_eq!(run(&["check", empty.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn build_sizes_and_refusal() {
    let ex1 = instance("example1.qp");
    let out = run(&["build", ex1.to_str().unwrap(), "--relaxation", "psd2:P={1,2},M=∅"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("1×(3×3), 4×(2×2), 4 scalar\n"), "{text}");

    let ex3 = instance("example3.qp");
    let out = run(&["build", ex3.to_str().unwrap(), "--relaxation", "exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("connected-plus-triplet {1,2,3}"));

    let out = run(&["--json", "build", ex3.to_str().unwrap(), "--relaxation", "shor"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["blocks"]["4"], 1);
}

#[test]
fn exported_file_solves_like_direct_build() {
    let ex2 = instance("example2.qp");
    let path = std::env::temp_dir().join(format!("rltsdp-cli-{}-ex2.dat-s", std::process::id()));
    let out = run(&["--json", "build", ex2.to_str().unwrap(), "-r", "exact", "--out", path.to_str().unwrap(), "--solve"]);
    assert_eq!(out.status.code(), Some(0));
    let direct = json(&out)["solve"]["primal_objective"].as_f64().unwrap();
    let out = run(&["--json", "solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "optimal");
    assert!((v["primal_objective"].as_f64().unwrap() - direct).abs() < 1e-6);
}

#[test]
fn compare_example_two() {
    let ex2 = instance("example2.qp");
    let out = run(&["--json", "compare", ex2.to_str().unwrap(), "--with-oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let names: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["shor-mc-tri", "DeyIda", "DeyIda+Shor", "new"]);
    assert_eq!(v["oracle_exact"], "-81329/20320");
    for row in v["rows"].as_array().unwrap() {
        // Every bound is below the optimum, up to solver tolerance.
        assert!(row["gap"].as_f64().unwrap() > -1e-6);
    }
}

#[test]
fn compare_separable_convex_is_tight() {
    let path = temp_file("convex.qp", "n 3\nd 1 2\nd 2 1\nd 3 4\nc 1 -1\nc 2 -3\nc 3 1\n");
    let out = run(&["--json", "compare", path.to_str().unwrap(), "--with-oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let oracle = v["oracle"].as_f64().unwrap();
    assert!((oracle + 2.125).abs() < 1e-12);
    for row in v["rows"].as_array().unwrap() {
        assert!((row["bound"].as_f64().unwrap() - oracle).abs() < 1e-5, "{row}");
    }
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "--n", "6", "--plus", "3", "--seed", "11", "--no-triplet"]);
    let b = run(&["gen", "--n", "6", "--plus", "3", "--seed", "11", "--no-triplet"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let path = temp_file("gen.qp", std::str::from_utf8(&a.stdout).unwrap());
    let out = run(&["--json", "check", path.to_str().unwrap()]);
    assert_eq!(json(&out)["has_triplet"], false);

    let out = run(&["gen", "--n", "5", "--plus", "0", "--seed", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let inst = rltsdp::instance::QpInstance::parse(&text).unwrap();
    assert!(inst.build_graph().plus_loops().is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["check", "/nonexistent/file.qp"]).status.code(), Some(1));
    let ex1 = instance("example1.qp");
    assert_eq!(run(&["build", ex1.to_str().unwrap(), "-r", "psd3"]).status.code(), Some(1));
    assert_eq!(run(&["gen", "--n", "4", "--plus", "4", "--density", "1", "--no-triplet"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn json_is_stable_across_runs() {
    let ex1 = instance("example1.qp");
    let a = run(&["--json", "build", ex1.to_str().unwrap(), "-r", "shor-mc-tri"]);
    let b = run(&["--json", "build", ex1.to_str().unwrap(), "-r", "shor-mc-tri"]);
    assert_eq!(a.stdout, b.stdout);
}
