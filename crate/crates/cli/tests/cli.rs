use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const EXAMPLE_M: &str = "0.17658,0.517888,0.448587\n0.214066,0.718154,0.849892\n0.796042,0.197801,0.233489\n";

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("goo-cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn goo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goo"))
        .args(args)
        .env("GOO_THREADS", "2")
        .output()
        .unwrap()
}

fn goo_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_goo"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn grid_csv(label: &str, map: impl Fn(f64, f64) -> (f64, f64)) -> String {
    let mut s = format!("# label: {label}\n");
    for i in 0..20 {
        for j in 0..20 {
            let (x, y) = map(-1.0 + 2.0 * i as f64 / 19.0, -1.0 + 2.0 * j as f64 / 19.0);
            s.push_str(&format!("{x},{y}\n"));
        }
    }
    s
}

#[test]
fn decompose_svd_matches_singular_values_and_is_reproducible() {
    let m = scratch("m.csv", EXAMPLE_M);
    let args = ["decompose", "--kind", "svd", "--input", m.to_str().unwrap(), "--seed", "42"];
    let first = goo(&args);
    assert_eq!(first.status.code(), Some(0));
    let v = json(&first);
    let diag: Vec<f64> = v["result"]["summary"]["core_diagonal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (got, want) in diag.iter().zip([1.43557, 0.66535, 0.0910448]) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert_eq!(v["version"], goo_core::VERSION);
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["config"]["optimizer"]["restarts"], 32);
    assert_eq!(goo(&args).stdout, first.stdout);
}

#[test]
fn decompose_reads_stdin_and_array_format() {
    let out = goo_stdin(
        &["decompose", "--kind", "lu", "--input", "-"],
        "# shape: 2,2\n4,6\n3,3\n",
    );
    assert_eq!(out.status.code(), Some(0));
    let l = &json(&out)["result"]["decomposition"]["factors"][0];
    assert_eq!(l["name"], "L");
}

#[test]
fn decompose_errors_exit_one() {
    let bad = scratch("spd.csv", "1,2\n2,1\n");
    let out = goo(&["decompose", "--kind", "cholesky", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive definite"));
    let out = goo(&["decompose", "--kind", "svd", "--input", "/nonexistent/m.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let m = scratch("m2.csv", EXAMPLE_M);
    let out = goo(&["decompose", "--kind", "polar", "--input", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decompose_reports_budget_exhaustion() {
    let m = scratch("m3.csv", EXAMPLE_M);
    let out = goo(&[
        "decompose", "--kind", "svd", "--input", m.to_str().unwrap(), "--max-iters", "5", "--restarts", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["summary"]["converged"], false);
}

#[test]
fn tensor_special_linear_core_has_two_nonzeros() {
    let t = scratch("a.tns", "# shape: 2,2,2\n1,0\n0,0\n0,0\n3,2\n");
    let out = goo(&["tensor", "--input", t.to_str().unwrap(), "--family", "sl"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["nnz_estimate"], 2);
    let out = goo(&["tensor", "--input", t.to_str().unwrap(), "--groups", "so:2;so:2;so:2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["nnz_estimate"], 3);
}

#[test]
fn tensor_malformed_header_exits_one() {
    let out = goo_stdin(&["tensor", "--input", "-"], "# shape: 2,x\n1,2\n");
    assert_eq!(out.status.code(), Some(1));
    let out = goo(&["tensor"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn lifting_and_subgroup_harnesses_pass_on_random_corpus() {
    let out = goo(&["tensor", "--check", "lifting", "--seeds", "50", "--restarts", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["count"], 50);
    assert_eq!(v["result"]["violations"], 0);
    let out = goo(&["tensor", "--check", "subgroup", "--seeds", "10", "--restarts", "8"]);
    assert_eq!(out.status.code(), Some(0));
    // an impossible slack demand turns every row into a violation
    let out = goo(&["tensor", "--check", "subgroup", "--seeds", "2", "--restarts", "4", "--slack=-1e9"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn normalize_recovers_distorted_square() {
    let sq = scratch("sq.csv", &grid_csv("square", |x, y| (x, y)));
    let out = goo(&["normalize", "--input", sq.to_str().unwrap(), "--distort-seed", "5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    let target = r["hull_area_before"].as_f64().unwrap().sqrt() / 2.0;
    let got = r["inf_norm"].as_f64().unwrap();
    assert!((got - target).abs() <= 0.02 * target, "{got} vs {target}");
    assert_eq!(r["hull_is_square"], true);
}

#[test]
fn normalize_pca_baseline_flags_sheared_square() {
    let sh = scratch("sh.csv", &grid_csv("sheared", |x, y| (x, x + y)));
    let report = sh.with_file_name("pca.json");
    let cloud = sh.with_file_name("pca.csv");
    let svg = sh.with_file_name("pca.svg");
    let out = goo(&[
        "normalize",
        "--input",
        sh.to_str().unwrap(),
        "--baseline",
        "pca",
        "--report",
        report.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "-o",
        cloud.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["result"]["hull_is_square"], false);
    assert!(std::fs::read_to_string(&cloud).unwrap().starts_with("# label: sheared\n"));
    assert_eq!(std::fs::read_to_string(&svg).unwrap().matches("<circle").count(), 400);

    let out = goo(&["normalize", "--input", sh.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json(&out)["result"]["hull_is_square"], true);
}

#[test]
fn normalize_missing_input_exits_one() {
    assert_eq!(goo(&["normalize", "--input", "/nonexistent/cloud.csv"]).status.code(), Some(1));
    let out = goo_stdin(&["normalize", "--input", "-"], "0,0\n1,1\n2,2\n3,3\n");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank-deficient"));
}

#[test]
fn verify_default_battery_passes() {
    let out = goo(&["verify", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains(" 0 failed"));
}

#[test]
fn verify_flags_log_abs() {
    let out = goo(&["verify", "--claim", "log-abs", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let row = v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["subject"] == "log-abs")
        .unwrap()
        .clone();
    assert_eq!(row["pass"], false);
    assert!(row["detail"].as_str().unwrap().contains("f(0)"));
}

#[test]
fn verify_json_schema() {
    let m = scratch("v.csv", EXAMPLE_M);
    let out = goo(&["verify", "--json", "--count", "4", "--density-count", "3", "--input", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["version"].is_string());
    assert_eq!(v["config"]["subcommand"], "verify");
    let result = &v["result"];
    let rows = result["rows"].as_array().unwrap();
    assert_eq!(result["passed"].as_u64().unwrap() as usize, rows.len());
    for r in rows {
        assert!(r["check"].is_string() && r["subject"].is_string() && r["pass"].is_boolean() && r["detail"].is_string());
    }
    assert!(rows.iter().any(|r| r["subject"] == "input0"));
}

#[test]
fn bad_thread_setting_is_an_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_goo"))
        .args(["verify", "--count", "1"])
        .env("GOO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
