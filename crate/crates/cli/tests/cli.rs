use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_impulse-dividend"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn params(mu_p: f64, s_p: f64, mu_m: f64, s_m: f64, a: f64, q: f64, beta: f64) -> String {
    format!(
        "[params]\nmu_plus = {mu_p}\nsigma_plus = {s_p}\nmu_minus = {mu_m}\nsigma_minus = {s_m}\na = {a}\nq = {q}\nbeta = {beta}\n"
    )
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_writes_pairs_and_verification() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["solve", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out.join("solve.json"));
    let pair = &v["result"]["pairs"][0];
    assert!((pair["z1"].as_f64().unwrap() - 0.4277).abs() < 1e-3);
    assert!((pair["z2"].as_f64().unwrap() - 1.9058).abs() < 1e-3);
    assert_eq!(v["result"]["verification"][0]["verdict"], "optimal-proven");
    assert_eq!(v["config"]["params"]["q"], 0.05);
    assert!(v["config"]["sim"]["horizon"].is_number());
}

#[test]
fn solve_without_out_prints_json_to_stdout() {
    let o = run(&["solve", "--beta", "0.8"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["params"]["beta"], 0.8);
    assert!(String::from_utf8_lossy(&o.stderr).contains("z1 ="));
}

#[test]
fn both_nonpositive_drifts_pay_down_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &params(-0.2, 0.5, -0.1, 0.4, 1.0, 0.1, 0.5));
    let o = run(&["solve", "--config", &cfg]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["regime"], "both-nonpositive");
    assert_eq!(v["result"]["pairs"][0]["z1"], 0.0);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for text in ["seed = 1\nsead = 2\n", "[params\nq = 1\n", "[sim]\nn_paths = 3\n"] {
        let cfg = write_config(dir.path(), text);
        let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert_eq!(err["error"], "config");
        assert!(o.stdout.is_empty());
        assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
    }
    let o = run(&["solve", "--beta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["sweep", "--axis", "gamma"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_reports_case_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &params(0.1, 0.3, 5.0, 0.3, 1.0, 0.1, 0.5));
    let o = run(&["classify", "--config", &cfg]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["result"]["regime"], "both-positive");
    assert_eq!(v["result"]["sub_case"], "iii");
}

#[test]
fn verify_reports_proven_pair_with_condition() {
    let o = run(&["verify"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let report = &v["result"][0]["report"];
    assert_eq!(report["verdict"], "optimal-proven");
    assert_eq!(report["condition_a"], true);
    assert!(String::from_utf8_lossy(&o.stderr).contains("optimal-proven [a,c]"));
}

#[test]
fn strict_exits_4_for_unproven_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\nz1 = 0.4277\nz2 = 2.4\n");
    let o = run(&["verify", "--strict", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&o.stderr.split(|&b| b == b'\n').nth(1).unwrap().to_vec()).unwrap();
    assert_eq!(err["error"], "not-proven");
    let o = run(&["verify", "--config", &cfg]);
    assert!(o.status.success());
    let o = run(&["solve", "--strict"]);
    assert!(o.status.success());
}

#[test]
fn simulate_paths_reset_to_lower_barrier() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "seed = 7\n[sim]\ndt = 0.01\nhorizon = 30.0\nn_paths = 10\nstore_paths = true\n",
    );
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    for out in [&first, &second] {
        let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let est = read_json(&first.join("estimate.json"));
    let z1 = est["result"]["pair"]["z1"].as_f64().unwrap();
    let z2 = est["result"]["pair"]["z2"].as_f64().unwrap();
    assert_eq!(est["result"]["x0"].as_f64().unwrap(), z1);

    let mut reader = csv::Reader::from_path(first.join("paths.csv")).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["time", "surplus", "dividend_amount", "regime", "path_id"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let mut impulses = 0;
    for w in rows.windows(2) {
        let amount: f64 = w[1][2].parse().unwrap();
        if amount > 0.0 {
            impulses += 1;
            assert_eq!(w[0][0], w[1][0]);
            assert_eq!(w[0][4], w[1][4]);
            let pre: f64 = w[0][1].parse().unwrap();
            let post: f64 = w[1][1].parse().unwrap();
            assert!(pre >= z2);
            assert_eq!(post, z1);
            assert!((pre - post - amount).abs() < 1e-12);
        }
    }
    assert!(impulses > 0);

    for name in ["paths.csv", "estimate.json"] {
        assert_eq!(fs::read(first.join(name)).unwrap(), fs::read(second.join(name)).unwrap());
    }
}

#[test]
fn simulate_store_paths_needs_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[sim]\nn_paths = 4\nstore_paths = true\n");
    let o = run(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn sweep_writes_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "sweep", "--axis", "sigma_minus", "--from", "0.3", "--to", "0.9", "--steps", "4", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 12);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 4);
    let mut values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    values.dedup();
    assert_eq!(values.len(), 4);
    assert!(rows.iter().all(|r| &r[0] == "sigma_minus" && r[11].is_empty()));
    let meta = read_json(&out.join("sweep.json"));
    assert_eq!(meta["result"]["errors"], 0);
}

#[test]
fn oracle_agrees_with_solver() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["oracle", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("oracle PASS"));
    let v = read_json(&out.join("oracle.json"));
    assert_eq!(v["result"]["passed"], true);
}
