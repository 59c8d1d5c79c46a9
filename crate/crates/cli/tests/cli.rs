use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn wsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsynth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn spec() -> &'static str {
    static PATH: OnceLock<String> = OnceLock::new();
    PATH.get_or_init(|| fixture("running-example.wfa").display().to_string())
}

/// The fixture with another measure header, written to a temp dir.
fn spec_with(dir: &Path, header: &str) -> String {
    let text = std::fs::read_to_string(fixture("running-example.wfa")).unwrap();
    let path = dir.join(format!("{}.wfa", header.replace([' ', ':', '/', '\n'], "_")));
    std::fs::write(&path, text.replace("measure: sum", header)).unwrap();
    path.display().to_string()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = wsynth(&all);
    (code(&out), serde_json::from_slice(&out.stdout).expect("valid json"))
}

#[test]
fn threshold_six_writes_a_realizer() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("out.mealy");
    let out = wsynth(&["synth", "threshold", spec(), "--cmp", "ge", "--nu", "6", "-o", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&file).unwrap().starts_with("mealy\n"));
    let out = wsynth(&["synth", "threshold", spec(), "--cmp", "ge", "--nu", "7"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn best_value_is_unrealizable() {
    assert_eq!(code(&wsynth(&["synth", "best-value", spec()])), 1);
}

#[test]
fn strict_dsum_has_no_path_at_one() {
    let arena = fixture("strict-dsum.arena").display().to_string();
    let out = wsynth(&["dsum-path", &arena, "--nu", "1", "--lambda", "1/2", "--trace"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("mrg_0:"));
    let out = wsynth(&["dsum-path", &arena, "--nu", "3/2", "--lambda", "1/2", "--strict"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("dsum: 5/4"));
}

#[test]
fn synthesized_realizers_verify() {
    let dir = tempfile::tempdir().unwrap();
    let avg = spec_with(dir.path(), "measure: avg");
    let dsum = spec_with(dir.path(), "measure: dsum\ndiscount: 1/2");
    let sum = spec().to_string();
    let cases: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["boolean", &sum], vec!["--objective", "boolean"]),
        (vec!["threshold", &sum, "--nu", "6"], vec!["--objective", "threshold", "--nu", "6"]),
        (vec!["threshold", &sum, "--cmp", "gt", "--nu", "5"], vec!["--objective", "threshold", "--cmp", "gt", "--nu", "5"]),
        (vec!["threshold", &avg, "--nu", "1"], vec!["--objective", "threshold", "--nu", "1"]),
        (vec!["threshold", &dsum, "--nu", "2/3"], vec!["--objective", "threshold", "--nu", "2/3"]),
        (vec!["approx", &sum, "--r", "4"], vec!["--objective", "approx", "--r", "4"]),
        (vec!["approx", &avg, "--r", "2/3"], vec!["--objective", "approx", "--r", "2/3"]),
    ];
    for (i, (synth, verify)) in cases.iter().enumerate() {
        let file = dir.path().join(format!("r{i}.mealy"));
        let mut args = vec!["synth"];
        args.extend(synth);
        args.extend(["-o", file.to_str().unwrap()]);
        assert_eq!(code(&wsynth(&args)), 0, "synth {synth:?}");
        let spec_path = synth[1];
        let mut args = vec!["verify", spec_path, file.to_str().unwrap()];
        args.extend(verify);
        let out = wsynth(&args);
        assert_eq!(code(&out), 0, "verify {verify:?}: {}", stdout(&out));
    }
}

#[test]
fn verify_failure_prints_witness_and_values() {
    let mealy = fixture("always-d.mealy").display().to_string();
    let out = wsynth(&["verify", spec(), &mealy, "--objective", "best-value"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("witness: a b"), "{text}");
    assert!(text.contains("value: 6"));
    assert!(text.contains("best value: 10"));
    let (exit, report) = json(&["verify", spec(), &mealy, "--objective", "best-value"]);
    assert_eq!(exit, 1);
    assert_eq!(report["witness"], serde_json::json!(["a", "b"]));
    assert_eq!(report["value"], "6");
    assert_eq!(report["best_value"], "10");
}

#[test]
fn strict_approx_is_unknown_at_cap() {
    let (exit, report) = json(&["synth", "approx", spec(), "--r", "4", "--strict", "--cap", "64"]);
    assert_eq!(exit, 2);
    assert_eq!(report["answer"], "unknown-at-cap");
    assert_eq!(report["cap"], 64);
}

#[test]
fn json_summary_has_fixed_keys() {
    let (exit, report) = json(&["synth", "threshold", spec(), "--nu", "6"]);
    assert_eq!(exit, 0);
    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    for key in ["command", "answer", "exit_code", "value", "best_value", "witness", "strategy_size", "cap"] {
        assert!(keys.contains(&key), "missing {key}");
    }
    assert!(!keys.contains(&"timings"));
    assert_eq!(report["answer"], "realizable");
    assert_eq!(report["exit_code"], 0);
    let (_, timed) = json(&["synth", "threshold", spec(), "--nu", "6", "--timings"]);
    assert!(timed["timings"]["total_ms"].is_number());
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["synth", "approx", spec(), "--r", "4"],
        vec!["domain-safe", spec(), "--dot"],
        vec!["synth", "threshold", spec(), "--nu", "6", "--json"],
    ] {
        let a = wsynth(&args);
        let b = wsynth(&args);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(code(&a), code(&b));
    }
}

#[test]
fn eval_and_bestval() {
    let out = wsynth(&["eval", spec(), "--input", "ab", "--output", "cd"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("value: 10"));
    assert_eq!(code(&wsynth(&["eval", spec(), "--input", "ab", "--output", "cc"])), 1);
    let (exit, report) = json(&["bestval", spec(), "--input", "aab"]);
    assert_eq!(exit, 0);
    assert_eq!(report["best_value"], "8");
    let (exit, report) = json(&["bestval", spec(), "--input", "aa"]);
    assert_eq!(exit, 1);
    assert_eq!(report["best_value"], "-inf");
}

#[test]
fn solve_prefix_on_strict_dsum() {
    let arena = fixture("strict-dsum.arena").display().to_string();
    let base = ["solve-prefix", &arena, "--measure", "dsum", "--lambda", "1/2", "--cmp", "ge"];
    let mut ge1 = base.to_vec();
    ge1.extend(["--nu", "1"]);
    assert_eq!(code(&wsynth(&ge1)), 0);
    let mut ge2 = base.to_vec();
    ge2.extend(["--nu", "3/2"]);
    assert_eq!(code(&wsynth(&ge2)), 1);
    let out = wsynth(&["solve-prefix", &arena, "--measure", "sum", "--cmp", "gt", "--nu", "1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn generated_spec_matches_mean_payoff() {
    let dir = tempfile::tempdir().unwrap();
    let arena = dir.path().join("g.arena");
    std::fs::write(&arena, "arena\nvertex: u adam\nvertex: v eve\ninitial: u\nedge: u - -1 v\nedge: v - 2 u\nedge: v - -5 v\n")
        .unwrap();
    let wfa = dir.path().join("g.wfa");
    let out = wsynth(&["gen", "mp-to-spec", arena.to_str().unwrap(), "-o", wfa.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let out = wsynth(&["synth", "threshold", wfa.to_str().unwrap(), "--nu", "0"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn domain_safe_dot() {
    let out = wsynth(&["domain-safe", spec(), "--dot"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("digraph"));
}

#[test]
fn errors_map_to_usage_and_input_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.wfa");
    std::fs::write(&broken, "wfa\nmeasure: median\n").unwrap();
    let dsum = spec_with(dir.path(), "measure: dsum\ndiscount: 1/2");
    let strict_dsum = fixture("strict-dsum.arena").display().to_string();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec![], 64),
        (vec!["frobnicate"], 64),
        (vec!["synth", "threshold", spec()], 64),
        (vec!["synth", "threshold", spec(), "--nu", "six"], 64),
        (vec!["synth", "threshold", spec(), "--nu", "1/0"], 64),
        (vec!["synth", "approx", spec(), "--r", "-1"], 64),
        (vec!["synth", "approx", &dsum, "--r", "1"], 64),
        (vec!["eval", spec(), "--input", "ab", "--output", "c"], 64),
        (vec!["eval", spec(), "--input", "az", "--output", "cd"], 64),
        (vec!["dsum-path", &strict_dsum, "--nu", "1", "--lambda", "2"], 64),
        (vec!["synth", "boolean", "/nonexistent.wfa"], 65),
        (vec!["synth", "boolean", broken.to_str().unwrap()], 65),
        (vec!["verify", spec(), spec(), "--objective", "boolean"], 65),
        (vec!["--help"], 0),
    ];
    for (args, expected) in cases {
        let out = wsynth(&args);
        assert_eq!(code(&out), expected, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
