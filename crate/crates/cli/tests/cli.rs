//! End-to-end runs of the `pbit-factor` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_bigint::BigInt;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pbit-factor"));
    for var in ["PBIT_SEED", "PBIT_WORKERS", "PBIT_OUT", "PBIT_CONFIG"] {
        c.env_remove(var);
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn factor_tiny_semiprime() {
    let o = run(&["factor", "77", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("p=7 q=11"), "{}", stdout(&o));
}

#[test]
fn prime_input_is_rejected() {
    let o = run(&["factor", "13"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("input is prime"));
}

#[test]
fn perfect_power_and_garbage_are_rejected() {
    let o = run(&["factor", "49"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("perfect power"));
    let o = run(&["factor", "12x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a decimal integer"));
}

#[test]
fn exhausted_budget_exits_3() {
    let o = run(&["factor", "19043", "--budget", "40"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget exhausted"));
}

#[test]
fn json_report_has_correct_factors() {
    let o = run(&["factor", "1016801", "--seed", "3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = v["factors"].as_array().unwrap();
    let p: BigInt = f[0].as_str().unwrap().parse().unwrap();
    let q: BigInt = f[1].as_str().unwrap().parse().unwrap();
    assert_eq!(p * q, BigInt::from(1_016_801));
    assert_eq!(v["method"], "lattice");
    for key in ["N", "relations_used", "lattices_consumed", "collision_rate", "tau_trials", "elapsed"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn refine_matches_the_oracle() {
    for index in 0..5 {
        let i = index.to_string();
        let o = run(&["refine", "-n", "1016801", "--seed", "4", "--index", &i, "--oracle"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).trim_end().ends_with("MATCH"), "{}", stdout(&o));
    }
}

#[test]
fn zero_sweeps_leave_babai_unchanged() {
    let o = run(&["refine", "-n", "1016801", "--seed", "4", "--index", "2", "--sweeps", "0", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["improvement_percent"], 0.0);
    assert_eq!(v["best_distance_sq"], v["babai_distance_sq"]);
    assert_eq!(v["sweeps"], 0);
}

#[test]
fn refine_json_schema() {
    let o = run(&["refine", "-n", "1016801", "--seed", "4", "--json", "--oracle"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in [
        "N",
        "m",
        "babai_distance",
        "best_distance",
        "improvement_percent",
        "sweeps_to_best",
        "optimum_distance_sq",
        "verdict",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "MATCH");
}

#[test]
fn lattice_file_round_trips_through_refine() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["lattice", "-n", "1016801", "--seed", "4", "--index", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("lattice.json");
    fs::write(&path, &o.stdout).unwrap();
    let from_file = run(&["refine", "--lattice-file", path.to_str().unwrap(), "--seed", "4", "--index", "1", "--json"]);
    let direct = run(&["refine", "-n", "1016801", "--seed", "4", "--index", "1", "--json"]);
    assert_eq!(stdout(&from_file), stdout(&direct));
}

#[test]
fn enumerate_writes_a_census() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["enumerate", "-n", "1016801", "--seed", "4", "--all", "--out", out, "--file", "census.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("census.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("state,distance_sq,is_sr_pair,u,v"));
    assert_eq!(lines.count(), 1 << 7);
}

#[test]
fn collect_writes_relations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["collect", "1016801", "--seed", "1", "--out", out, "--file", "rel.jsonl"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("rel.jsonl")).unwrap();
    assert!(text.lines().count() >= 51);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert!(first.get("u").is_some() && first.get("e_prime").is_some());
}

fn experiment(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["experiment"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", dir.to_str().unwrap()]);
    run(&all)
}

#[test]
fn experiments_are_idempotent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["fig3", "--bits", "20:40", "--lattices", "20", "--seed", "7"];
    assert_eq!(experiment(a.path(), &args).status.code(), Some(0));
    assert_eq!(experiment(b.path(), &args).status.code(), Some(0));
    for name in ["fig3.csv", "fig3.manifest.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
}

#[test]
fn fig2a_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = experiment(dir.path(), &["fig2a", "--dims", "6:7", "--lattices", "3", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("fig2a.csv")).unwrap();
    assert!(text.starts_with("dimension,collision_rate,ci_low,ci_high,"));
    assert_eq!(text.lines().count(), 3);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fig2a.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["output_file"], "fig2a.csv");
    assert_eq!(manifest["output_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn fig4_includes_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let o = experiment(
        dir.path(),
        &["fig4", "--bits", "20:24", "--semiprimes", "2", "--recovery-lattices", "2", "--seed", "1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("fig4.csv")).unwrap();
    let header = text.lines().next().unwrap();
    for col in ["pred_enum", "pred_pc", "mean_lattices", "recovery_fraction", "collision_rate"] {
        assert!(header.split(',').any(|c| c == col), "missing {col}");
    }
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn unknown_experiment_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(experiment(dir.path(), &["fig9"]).status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# defaults\nseed = 4\nindex = 9\nsweeps = 0\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let via_config = run(&["refine", "-n", "1016801", "--config", cfg, "--json"]);
    let via_flags = run(&["refine", "-n", "1016801", "--seed", "4", "--sweeps", "0", "--json"]);
    assert_eq!(stdout(&via_config), stdout(&via_flags));
    let overridden = run(&["refine", "-n", "1016801", "--config", cfg, "--sweeps", "30", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&overridden)).unwrap();
    assert_eq!(v["sweeps"], 30);
}

#[test]
fn seed_comes_from_the_environment() {
    let with_env = bin()
        .args(["refine", "-n", "1016801", "--json", "--index", "3"])
        .env("PBIT_SEED", "11")
        .output()
        .unwrap();
    let with_flag = run(&["refine", "-n", "1016801", "--json", "--index", "3", "--seed", "11"]);
    assert_eq!(stdout(&with_env), stdout(&with_flag));
}

#[test]
fn bad_config_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "seed 4\n").unwrap();
    let o = run(&["factor", "77", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
