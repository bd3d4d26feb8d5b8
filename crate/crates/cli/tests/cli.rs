use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempoly")).args(args).output().expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr)
        .unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

fn fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/omega_d2_m5.json").display().to_string()
}

fn p(dir: &tempfile::TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn plan_feasible_qubit_rewind() {
    let o = run(&["plan", "--d", "2", "--n", "1", "--budget", "1", "--targets", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["version"], tempoly::VERSION);
    assert_eq!(v["command"][0], "plan");
    assert_eq!(v["result"]["schedule"]["phases"][0]["kind"], "rewind");
    assert_eq!(v["result"]["verification"]["pass"], true);
}

#[test]
fn plan_infeasible_exits_one() {
    let o = run(&["plan", "--d", "3", "--n", "1", "--budget", "1", "--targets", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "infeasible");
    assert_eq!(e["exit_code"], 1);
}

#[test]
fn plan_compiles_program() {
    let dir = tempfile::tempdir().unwrap();
    let prog = p(&dir, "prog.json");
    let o = run(&[
        "plan",
        "--d",
        "2",
        "--budget",
        "1",
        "--targets",
        "1,-0.5",
        "--dt",
        "0.125",
        "--compile",
        "--program-out",
        &prog,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["result"]["compile"]["achieved_steps"], serde_json::json!([8, -4]));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&prog).unwrap()).unwrap();
    assert_eq!(doc["format"], "tempoly-program");
    assert_eq!(doc["metadata"]["seed"], 0);
}

#[test]
fn verify_fixture_passes_every_draw() {
    let f = fixture();
    let o = run(&["verify", "--poly", &f, "--target", "swap", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &stdout_json(&o)["result"];
    assert_eq!(r["passes"], 100);
    assert_eq!(r["zero_draws"], 0);
}

#[test]
fn verify_wrong_target_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let poly = p(&dir, "r.json");
    assert!(run(&["construct", "qubit-rewind", "--s", "1", "--out", &poly]).status.success());
    let o = run(&["verify", "--poly", &poly, "--target", "identity", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "verification");
    assert_eq!(stdout_json(&o)["result"]["pass"], false);
}

#[test]
fn construct_card_simulate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let poly = p(&dir, "rewind.json");
    assert!(run(&["construct", "qubit-rewind", "--s", "2", "--out", &poly]).status.success());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&poly).unwrap()).unwrap();
    assert_eq!(doc["degrees"], serde_json::json!([6]));
    assert_eq!(doc["metadata"]["construction"]["kind"], "qubit-rewind");

    let card = stdout_json(&run(&["card", "--poly", &poly]));
    assert_eq!(card["result"]["canonical_normalization_log2"], 6.0);

    let csv = p(&dir, "trials.csv");
    let args = ["--seed", "3", "simulate", "--poly", &poly, "--trials", "500", "--csv", &csv];
    let a = run(&args);
    assert!(a.status.success());
    let est = stdout_json(&a);
    assert_eq!(est["result"]["trials"], 500);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 501);
    // Reports are byte-identical for a fixed seed, whatever the thread count.
    let b = run(&["--jobs", "1", "--seed", "3", "simulate", "--poly", &poly, "--trials", "500", "--csv", &csv]);
    assert_eq!(stdout_json(&b)["result"], est["result"]);
    assert_eq!(run(&args).stdout, a.stdout);
}

#[test]
fn fast_forward_expression_is_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let poly = p(&dir, "ff.json");
    assert!(run(&["construct", "fast-forward", "--n", "2", "--j", "0", "--s", "1", "--out", &poly]).status.success());
    let o = run(&["simulate", "--poly", &poly, "--mode", "compressed", "--trials", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Two Ω̃ copies, five branching columns per party each; free V columns add nothing.
    assert_eq!(stdout_json(&o)["result"]["normalization_log2"], 20.0);
}

#[test]
fn usage_errors_exit_two() {
    let o = run(&["plan", "--d", "2", "--budget", "1", "--targets", "1", "--nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "usage");
    let o = run(&["verify", "--poly", "/definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = p(&dir, "run.toml");
    std::fs::write(&cfg, "seed = 7\n[plan]\nd = 2\nbudget = 3.0\n").unwrap();
    let o = run(&["--config", &cfg, "plan", "--targets", "1", "--budget", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["result"]["query"]["budget"], 1.0);
}

#[test]
fn search_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(&dir, "search");
    let o = run(&["search", "--d", "2", "--D", "2", "--m", "2", "--out-dir", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("search/report.json")).unwrap()).unwrap();
    assert_eq!(report["result"]["report"]["dims"]["quotient"], 0);
    assert_eq!(report["result"]["report"]["dims"]["nperp"], 16);
}

#[test]
fn reproduce_writes_summary_and_flags_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let rd = p(&dir, "report");
    let o = run(&["reproduce-paper", "--only", "15", "--report-dir", &rd]);
    assert!(o.status.success());
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["result"]["all_pass"], true);
    assert!(summary["result"]["criteria"][0]["runtime_s"].is_number());
    assert!(std::fs::read_to_string(dir.path().join("report/summary.txt")).unwrap().starts_with("PASS criterion 15"));

    // Flip one coefficient sign.
    let text = std::fs::read_to_string(fixture()).unwrap().replacen("\"re\":1.0", "\"re\":-1.0", 1);
    let bad = p(&dir, "bad.json");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["reproduce-paper", "--only", "2", "--fixture", &bad, "--report-dir", &rd]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json_tail(&o);
    assert!(e["error"]["message"].as_str().unwrap().contains("2 fixture validity"));
}

/// Progress lines precede the error document on stderr.
fn stderr_json_tail(o: &Output) -> Value {
    let s = String::from_utf8_lossy(&o.stderr);
    let start = s.find("\n{").map(|i| i + 1).unwrap_or(0);
    serde_json::from_str(&s[start..]).unwrap_or_else(|e| panic!("{e}: {s}"))
}
