use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn romcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_romcover"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_opt_run_and_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("fig.json");
    let out = romcover(&["gen", "--family", "figure1", "--m", "4", "--out", path_str(&inst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig.sidecar.json")).unwrap()).unwrap();
    assert_eq!(sidecar["known_opt"], 4.0);
    assert_eq!(sidecar["family"], "figure1");
    assert_eq!(sidecar["log_domain"], false);
    let body: Value = serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(body["m"], 4);
    assert_eq!(body["sizes"].as_array().unwrap().len(), 7);

    let out = romcover(&["opt", "--instance", path_str(&inst)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["opt"], 4.0);

    let out = romcover(&["run", "--algo", "greedy", "--instance", path_str(&inst), "--order", "given"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["min_load"], 1.0);

    let out = romcover(&["run", "--algo", "alg1", "--instance", path_str(&inst), "--order", "given", "--force-t", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["min_load"], 1.0);

    let csv_path = dir.path().join("est.csv");
    let out = romcover(&[
        "estimate", "--algo", "greedy", "--instance", path_str(&inst), "--trials", "200", "--seed", "5", "--out",
        path_str(&csv_path),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    assert_eq!(&rows[0][col("trials")], "200");
    let mean: f64 = rows[0][col("mean")].parse().unwrap();
    assert!((1.0..=4.0).contains(&mean));
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("u.json");
    assert!(romcover(&["gen", "--family", "uniform", "--n", "40", "--m", "5", "--seed", "3", "--out", path_str(&inst)])
        .status
        .success());
    let run = |workers: &str| {
        let out = romcover(&[
            "estimate", "--algo", "alg1", "--instance", path_str(&inst), "--trials", "300", "--seed", "9",
            "--workers", workers,
        ]);
        assert!(out.status.success());
        json_stdout(&out)
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a["mean_min_load"], b["mean_min_load"]);
    assert_eq!(a["ci95"], b["ci95"]);
}

#[test]
fn verdict_exit_codes() {
    let out = romcover(&["guessgame", "--g", "4", "--N", "2000", "--trials", "4000", "--seed", "1", "--tolerance", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["verdict"], "PASS");
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));

    // A zero tolerance cannot be met by a sampled rate.
    let out = romcover(&["guessgame", "--g", "4", "--N", "2000", "--trials", "300", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_stdout(&out)["verdict"], "FAIL");

    let out = romcover(&["talent", "--K", "16", "--T", "4", "--n", "100", "--strategy", "never", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["mean"], 0.0);

    // T <= 2 leaves the bound undefined.
    let out = romcover(&["talent", "--K", "4", "--T", "2", "--n", "50", "--strategy", "all", "--trials", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["verdict"], "VACUOUS");

    let out = romcover(&["theorem3", "--m", "8", "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_stdout(&out)["verdict"], "VACUOUS");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(romcover(&[]).status.code(), Some(2));
    assert_eq!(romcover(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(romcover(&["gen", "--family", "proper", "--m", "100"]).status.code(), Some(2));
    assert_eq!(romcover(&["opt", "--instance", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(romcover(&["talent", "--K", "5", "--T", "3", "--n", "4", "--trials", "40"]).status.code(), Some(2));
    assert_eq!(romcover(&["bounds", "--m", "16", "--K", "3"]).status.code(), Some(2));
    assert_eq!(romcover(&["lemma5", "--m", "100", "--d", "2", "--n", "800", "--trials", "40"]).status.code(), Some(2));
    assert_eq!(romcover(&["estimate", "--algo", "greedy", "--instance", "x.json", "--trials", "10"]).status.code(), Some(2));
}

#[test]
fn bounds_and_json_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("b.json");
    let out = romcover(&["bounds", "--m", "16", "--K", "16", "--T", "4", "--out", path_str(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let lb = v["theorem10_lower_bound"].as_f64().unwrap();
    assert!((lb - 1.0 / 1.16).abs() < 1e-12);
    let l8 = v["lemma8_bound"].as_f64().unwrap();
    assert!((l8 - 25.0 * std::f64::consts::PI / 48.0).abs() < 1e-12);

    let csv_path = dir.path().join("b.csv");
    assert!(romcover(&["bounds", "--m", "27", "--out", path_str(&csv_path)]).status.success());
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert!(text.lines().next().unwrap().contains("theorem10_lower_bound"));
}

#[test]
fn reduction_instances_are_log_domain() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("r.json");
    let out = romcover(&["gen", "--family", "reduction", "--K", "3", "--T", "2", "--lambda", "10", "--out", path_str(&inst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.sidecar.json")).unwrap()).unwrap();
    assert_eq!(side["log_domain"], true);
    let out = romcover(&["run", "--algo", "greedy", "--instance", path_str(&inst), "--order", "given"]);
    assert_eq!(out.status.code(), Some(0));
    // Estimating an expectation of exponents is refused.
    let out = romcover(&["estimate", "--algo", "greedy", "--instance", path_str(&inst), "--trials", "40"]);
    assert_eq!(out.status.code(), Some(2));
}
