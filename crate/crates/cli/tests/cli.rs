use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use unison_core::scheduler::{run_execution, DaemonStrategy, Limits, StopOn};
use unison_core::trace::{read_jsonl, to_jsonl_string};
use unison_core::{NodeState, Period, Topology, Unison};

fn unison(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unison")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

#[test]
fn ring_run_converges_and_verifies() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "ring.jsonl");
    let out = unison(&["run", "--graph", "gen:ring:4", "--B", "auto", "--init", "random", "--daemon", "dist-random:0.5", "--seed", "1", "--stop-on", "clean", "--out", &trace]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert!(report["summary"]["rounds_to_clean"].as_u64().unwrap() <= 6);
    assert_eq!(report["summary"]["B"], 6);
    let out = unison(&["verify", &trace]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["status"], "ok");
}

#[test]
fn single_error_clears_in_one_round() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("one_error.cfg");
    std::fs::write(&cfg, "# a root at the floor\nE -4\n").unwrap();
    let init = format!("file:{}", cfg.display());
    let out = unison(&["run", "--graph", "gen:path:1", "--init", &init, "--B", "4", "--out", &path(&dir, "t.jsonl")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["summary"]["rounds_to_clean"], 1);
    // Above the floor the root resets first.
    std::fs::write(&cfg, "E -3\n").unwrap();
    let out = unison(&["run", "--graph", "gen:path:1", "--init", &init, "--B", "4", "--stop-on", "clean", "--out", &path(&dir, "t.jsonl")]);
    assert_eq!(json(&out)["summary"]["rounds_to_clean"], 2);
}

#[test]
fn input_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "t.jsonl");
    assert_eq!(code(&unison(&["run", "--graph", "file:/definitely/missing.graph", "--out", &out])), 3);
    assert_eq!(code(&unison(&["run", "--graph", "gen:path:5", "--B", "4", "--out", &out])), 3);
    assert_eq!(code(&unison(&["run", "--graph", "gen:path:3", "--daemon", "round-robin", "--out", &out])), 3);
    assert_eq!(code(&unison(&["run", "--graph", "gen:path:3", "--init", "clean-uniform:99", "--out", &out])), 3);
    assert_eq!(code(&unison(&["frobnicate"])), 3);
    assert_eq!(code(&unison(&["verify", "/definitely/missing.jsonl"])), 3);
}

#[test]
fn truncated_trace_exits_3() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "t.jsonl");
    assert_eq!(code(&unison(&["run", "--graph", "gen:star:5", "--stop-on", "clean", "--out", &trace])), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let cut = dir.path().join("cut.jsonl");
    std::fs::write(&cut, &text[..text.len() / 2]).unwrap();
    assert_eq!(code(&unison(&["verify", &cut.display().to_string()])), 3);
}

fn write_forged_root_creation(file: &Path) {
    let t = Topology::path(2).unwrap();
    let period = Period::new(4).unwrap();
    let mut trace = run_execution(&Unison::greedy(), &t, period, vec![NodeState::correct(0); 2], &DaemonStrategy::Synchronous, Limits::new(1, StopOn::Never), 0).unwrap();
    trace.steps[0].post = vec![NodeState::correct(0), NodeState::correct(2)];
    std::fs::write(file, to_jsonl_string(&trace)).unwrap();
}

#[test]
fn forged_root_creation_exits_1() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("forged.jsonl");
    write_forged_root_creation(&file);
    let out = unison(&["verify", &file.display().to_string()]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["status"], "invariant_violation");
    let kinds: Vec<&str> = report["invariants"].as_array().unwrap().iter().map(|v| v["kind"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"root_creation"), "{kinds:?}");
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.jsonl"), path(&dir, "b.jsonl"));
    for out in [&a, &b] {
        let r = unison(&["run", "--graph", "gen:random:7:9", "--seed", "5", "--daemon", "central-random", "--stop-on", "clean", "--linger", "5", "--out", out]);
        assert_eq!(code(&r), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn exhaustive_pairs_pass() {
    let out = unison(&["sweep", "--exhaustive", "--exhaustive-n", "2", "--seeds", "0", "--B", "4", "--depth", "20"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["status"], "ok");
    let enumerated = report["enumerated"].as_array().unwrap();
    assert_eq!(enumerated.len(), 4);
    assert!(enumerated.iter().all(|e| e["violations"] == 0 && e["bounds_exceeded"] == false));
}

#[test]
fn sampled_ring_sweep_passes_and_writes_csv() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "moves.csv");
    let args = ["sweep", "--families", "ring", "--n-min", "6", "--n-max", "6", "--seeds", "100", "--daemons", "sync;dist-random:0.5", "--csv", &csv];
    let out = unison(&args);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["cells"], 200);
    assert!(report["max_rounds_minus_bound"].as_i64().unwrap() <= 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 201);
    assert!(text.starts_with("family,daemon,seed,n,B,D,moves,rounds_to_clean"));
    // Same cells, one thread.
    let single = Command::new(env!("CARGO_BIN_EXE_unison")).args(args).env("UNISON_THREADS", "1").output().unwrap();
    assert_eq!(code(&single), 0);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);
}

#[test]
fn injected_faults_fail_the_sweep() {
    let out = unison(&["sweep", "--families", "path", "--n-min", "4", "--n-max", "4", "--seeds", "3", "--inject-fault"]);
    assert_eq!(code(&out), 1);
    assert!(json(&out)["failed_cells"].as_u64().unwrap() > 0);
}

#[test]
fn lazy_min_prop_terminates_within_budget() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "lazy.jsonl");
    let out = unison(&["simulate", "--alg", "min-prop", "--mode", "lazy", "--graph", "gen:path:3", "--init", "clean-uniform:0", "--daemon", "dist-random:0.5", "--seed", "2", "--out", &trace]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["summary"]["termination"], "Terminal");
    let lazy = &report["simulation"]["lazy"];
    let t = lazy["t_measured"].as_u64().unwrap();
    assert!(lazy["moves_after_clean"].as_u64().unwrap() <= 3 * t + 3 * 2);
    let out = unison(&["verify", &trace]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["simulation"]["algorithm"], "min-prop");
}

#[test]
fn greedy_bfs_keeps_running_and_verifies() {
    let dir = TempDir::new().unwrap();
    let trace = path(&dir, "greedy.jsonl");
    let out = unison(&["simulate", "--alg", "min-id-bfs", "--mode", "greedy", "--ids", "4,2,5,1,3", "--graph", "gen:ring:5", "--init", "random", "--seed", "9", "--stop-on", "clean", "--linger", "120", "--out", &trace]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert!(report["simulation"]["simulated_rounds"].as_u64().unwrap() >= 10);
    assert_eq!(code(&unison(&["verify", &trace])), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let parsed = read_jsonl::<unison_core::synchronizer::SimNodeState<unison_core::synchronizer::BfsState>>(&text).unwrap();
    assert!(parsed.last_config().iter().all(|s| s.curr.leader == 1));
}

#[test]
fn duplicate_identifiers_exit_3() {
    let dir = TempDir::new().unwrap();
    let out = unison(&["simulate", "--alg", "min-id-bfs", "--ids", "1,2,2", "--graph", "gen:path:3", "--out", &path(&dir, "x.jsonl")]);
    assert_eq!(code(&out), 3);
    let out = unison(&["simulate", "--alg", "min-prop", "--values", "1,2", "--graph", "gen:path:3", "--out", &path(&dir, "x.jsonl")]);
    assert_eq!(code(&out), 3);
    let out = unison(&["simulate", "--alg", "max-flow", "--graph", "gen:path:3", "--out", &path(&dir, "x.jsonl")]);
    assert_eq!(code(&out), 3);
}
