//! End-to-end runs of the binary: outputs, overrides and exit codes.

use std::process::{Command, Output};

fn geochoice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geochoice"))
        .args(args)
        .env_remove("GEOCHOICE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_prints_hitting_times() {
    let o = geochoice(&["simulate", "--r", "0.05", "--k", "1", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("k = 1: tau1 = "), "{out}");
    assert!(out.contains("k_connected k=1 @tau"), "{out}");
}

#[test]
fn hitting_times_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("h.csv");
    let o = geochoice(&["hitting-times", "--trials", "3", "--r", "0.05", "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("tool_version,config_hash,seed,trial"));
    // three trials of tau1, tau2, tau1_scaled and five connectivity checkpoints
    assert_eq!(text.lines().count(), 1 + 3 * 8);

    let json = dir.path().join("h.json");
    let o = geochoice(&[
        "hitting-times", "--trials", "2", "--r", "0.05", "--format", "json", "--out", json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&json).unwrap();
    assert!(text.contains("\"config_hash\"") && text.contains("\"summary\"") && text.contains("\"version\""));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nr=0.05\nk=1\ntrials=2\nseed=9\n").unwrap();
    let a = geochoice(&["hitting-times", "--config", cfg.to_str().unwrap()]);
    let b = geochoice(&["hitting-times", "--config", cfg.to_str().unwrap(), "--seed", "10"]);
    let c = geochoice(&["hitting-times", "--r", "0.05", "--trials", "2", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_ne!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a), stdout(&c));
}

#[test]
fn thread_count_from_environment_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("t{threads}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_geochoice"))
            .args(["hitting-times", "--trials", "4", "--r", "0.05", "--format", "json", "--out"])
            .arg(&path)
            .env("GEOCHOICE_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn exit_codes() {
    // configuration errors
    assert_eq!(geochoice(&["hitting-times", "--k", "0"]).status.code(), Some(2));
    assert_eq!(geochoice(&["hitting-times", "--process", "sideways"]).status.code(), Some(2));
    assert_eq!(geochoice(&["offline", "--process", "one"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "colour=blue\n").unwrap();
    assert_eq!(geochoice(&["simulate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    // every offline trial is degenerate at this scale
    let o = geochoice(&["offline", "--trials", "2", "--r", "0.03"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("REGIME_TOO_SPARSE"));
    // unwritable output
    let o = geochoice(&["hitting-times", "--trials", "1", "--r", "0.05", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent-dir/x.csv"));
    // missing config file is an IO error too
    assert_eq!(geochoice(&["simulate", "--config", "/nonexistent-dir/c.cfg"]).status.code(), Some(4));
}

#[test]
fn hamilton_writes_a_cycle() {
    // d = 1, r = 0.05, c = 2: 40 cubes; 4000 points fill every cube far past M = 30
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cycle.csv");
    let o = geochoice(&[
        "hamilton", "--d", "1", "--r", "0.05", "--c", "2", "--M", "30", "--t", "4000", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("preconditions A1 and A2 hold"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("position,vertex"));
    assert_eq!(text.lines().count(), 4001);
}

#[test]
fn hamilton_in_the_sparse_regime_exits_with_a_diagnostic() {
    let o = geochoice(&["hamilton", "--r", "0.05"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn volume_prints_tables() {
    let o = geochoice(&["volume", "--r", "0.05", "--samples", "2000", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("nu/r,union_quadrature"));
    assert!(out.contains("cr_cubes,cr_lower"));
    assert!(out.contains("k,t_min,t_max"));
}
