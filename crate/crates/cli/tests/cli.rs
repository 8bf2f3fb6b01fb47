use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dglr(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dglr")).args(args).env("DGLR_CACHE", cache).output().expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn frobenius_unique_solution() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["frobenius", "--denoms", "115,151,201,303,403", "--target", "690"]);
    assert_eq!(code(&out), 0);
    let v = &json_lines(&out)[0];
    assert_eq!(v["solutions"], serde_json::json!([[6, 0, 0, 0, 0]]));
    assert_eq!(v["count"], 1);
}

#[test]
fn frobenius_bounds_and_empty_sets() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["frobenius", "--denoms", "2,3", "--target", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["count"], 0);
    let out = dglr(dir.path(), &["frobenius", "--denoms", "1,2", "--target", "4", "--min", "2:1", "--max", "1:0"]);
    assert_eq!(json_lines(&out)[0]["solutions"], serde_json::json!([[0, 2]]));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["frobenius", "--denoms", "2,x", "--target", "3"][..],
        &["frobenius", "--denoms", "2,3", "--target", "3", "--min", "9:1"],
        &["verify", "--lemma", "no-such-suite"],
        &["realize", "--cyclic", "0"],
        &["bogus"],
    ] {
        let out = dglr(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(json_lines(&out)[0]["error"].is_string(), "{args:?}");
    }
}

#[test]
fn bad_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let looped = dir.path().join("loop.txt");
    std::fs::write(&looped, "v u\nu v\nu u\n").unwrap();
    let out = dglr(dir.path(), &["build", "--digraph", looped.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(json_lines(&out)[0]["message"].as_str().unwrap().contains("loop"));
    let table = dir.path().join("table.json");
    std::fs::write(&table, r#"{"elements": ["e", "a"], "product": [[0, 1], [1, 1]]}"#).unwrap();
    assert_eq!(code(&dglr(dir.path(), &["realize", "--group-table", table.to_str().unwrap()])), 2);
}

#[test]
fn build_two_cycle_first_level() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["build"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 9);
    assert_eq!(v["level"], 1);
}

#[test]
fn realize_cyclic_groups() {
    let dir = TempDir::new().unwrap();
    for (k, order) in [(3, 3), (1, 1)] {
        let out = dglr(dir.path(), &["realize", "--cyclic", &k.to_string()]);
        assert_eq!(code(&out), 0);
        let v = &json_lines(&out)[0];
        assert_eq!(v["group_order"], k);
        assert_eq!(v["certificate"]["automorphism_order"], order);
        assert_eq!(v["certificate"]["automorphisms"].as_array().unwrap().len(), order);
    }
}

#[test]
fn verify_passing_and_budget_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["verify", "--lemma", "L4.2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["status"], "pass");
    let out = dglr(dir.path(), &["verify", "--lemma", "top-degree", "--budget", "0"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json_lines(&out)[0]["status"], "budget-exceeded");
}

#[test]
fn verify_failure_exits_one() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["verify", "--lemma", "frobenius"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_lines(&out)[0]["status"], "fail");
}

#[test]
fn warm_cache_is_byte_identical_and_rechecks() {
    let dir = TempDir::new().unwrap();
    let args = ["verify", "--lemma", "square-zero,frobenius,decomposables-690"];
    let cold = dglr(dir.path(), &args);
    let warm = dglr(dir.path(), &args);
    assert_eq!(cold.stdout, warm.stdout);
    assert_eq!(code(&cold), code(&warm));
    let ids: Vec<String> = json_lines(&cold).iter().map(|v| v["lemma_id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, ["frobenius", "square-zero", "decomposables-690"]);
    let reports = dir.path().join("reports.jsonl");
    std::fs::write(&reports, &cold.stdout).unwrap();
    let re = dglr(dir.path(), &["verify", "--recheck", reports.to_str().unwrap()]);
    assert_eq!(code(&re), 0);
    assert!(json_lines(&re).iter().all(|v| v["recheck"] == "pass"));
}

#[test]
fn tampered_report_fails_recheck() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["verify", "--lemma", "frobenius"]);
    let text = String::from_utf8(out.stdout).unwrap().replace("[6,0,0,0,0]", "[5,0,0,0,0]");
    let reports = dir.path().join("reports.jsonl");
    std::fs::write(&reports, text).unwrap();
    let re = dglr(dir.path(), &["verify", "--recheck", reports.to_str().unwrap()]);
    assert_eq!(code(&re), 1);
    assert_eq!(json_lines(&re)[0]["recheck"], "fail");
}

#[test]
fn cylinder_and_homology_commands() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["cylinder-check"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["squares_zero"], true);
    let out = dglr(dir.path(), &["homology", "--degrees", "115,690"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out).len(), 1);
}

#[test]
fn synthetic_full_tower_and_json_digraph() {
    let dir = TempDir::new().unwrap();
    let out = dglr(dir.path(), &["build", "--scale", "synthetic", "--level", "4"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["level"], 4);
    assert!(v["generators"].as_array().unwrap().len() > 9);
    let g = dir.path().join("two_cycle.json");
    std::fs::write(&g, r#"{"vertices": ["v", "u"], "edges": [["v", "u"], ["u", "v"]]}"#).unwrap();
    let out = dglr(dir.path(), &["verify", "--lemma", "L3.4", "--digraph", g.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_lines(&out)[0]["alias"], "L3.4");
}
