//! End-to-end checks of the command-line surface: every emitted file parses
//! back, outputs are deterministic, and exit codes follow the contract.

use std::path::PathBuf;

use localcast::analysis::rows_from_summary_csv;
use localcast::cli;
use localcast::{AlgoVariant, Scenario};

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("localcast-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run_cli(args: &[&str]) -> i32 {
    cli::run(std::iter::once("localcast").chain(args.iter().copied()))
}

#[test]
fn gen_then_run_emits_parsable_trace() {
    let dir = TempDir::new("trace");
    let scn = dir.path("s.json");
    let trace = dir.path("t.jsonl");
    assert_eq!(
        run_cli(&[
            "gen", "--kind", "clustered", "--n", "8", "--n-bound", "16", "--seed", "2", "--out",
            scn.to_str().unwrap()
        ]),
        0
    );
    let loaded = Scenario::load(&scn).unwrap();
    assert_eq!(loaded.len(), 8);
    assert_eq!(
        run_cli(&[
            "run", "--scenario", scn.to_str().unwrap(), "--variant", "alg2", "--seed", "4",
            "--out", trace.to_str().unwrap()
        ]),
        0
    );
    let body = std::fs::read_to_string(&trace).unwrap();
    let mut slot_lines = 0;
    let mut node_lines = 0;
    for line in body.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v.get("t").is_some() {
            slot_lines += 1;
        } else {
            assert!(v.get("node").is_some());
            assert!(v.get("halt_reason").is_some());
            assert!(v.get("N_x").is_some());
            node_lines += 1;
        }
    }
    assert!(slot_lines > 0);
    assert_eq!(node_lines, 8);
}

#[test]
fn sweep_output_is_deterministic_and_feeds_fit() {
    let dir = TempDir::new("sweep");
    let csv_a = dir.path("a.csv");
    let csv_b = dir.path("b.csv");
    let args = |out: &str| {
        [
            "localcast", "sweep", "--kind", "clustered", "--variant", "alg2", "--n", "64",
            "--nx", "4,8,12,16", "--seeds", "3", "--seed", "5", "--out", out,
        ]
        .map(String::from)
    };
    assert_eq!(cli::run(args(csv_a.to_str().unwrap())), 0);
    assert_eq!(cli::run(args(csv_b.to_str().unwrap())), 0);
    let a = std::fs::read(&csv_a).unwrap();
    let b = std::fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "same argv must produce identical bytes");

    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("node_id,n,N_x,wake,halt,first_success,reason,fallbacks\n"));
    let rows = rows_from_summary_csv(&text, AlgoVariant::Alg2).unwrap();
    assert_eq!(rows.len(), 3 * (4 + 8 + 12 + 16));

    // the fit subcommand consumes the same file
    let report = dir.path("fit.json");
    assert_eq!(
        run_cli(&[
            "fit", "--summary", csv_a.to_str().unwrap(), "--form", "n", "--variant", "alg2",
            "--fallbacks", "--out", report.to_str().unwrap()
        ]),
        0
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["form"], "n_plus_log2");
    assert!(v["a"].is_number() && v["b"].is_number() && v["residual"].is_number());
    assert_eq!(v["cells"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_suites_pass_on_small_corpus() {
    assert_eq!(
        run_cli(&["verify", "--suite", "all", "--n", "48", "--trials", "6", "--seed", "1"]),
        0
    );
    assert_eq!(run_cli(&["verify", "--suite", "calculus", "--seed", "1"]), 0);
    assert_eq!(run_cli(&["verify", "--suite", "bogus", "--seed", "1"]), 2);
}

#[test]
fn lowerbound_emits_bound_table_and_instance() {
    let dir = TempDir::new("lb");
    let csv = dir.path("rows.csv");
    let inst = dir.path("inst.json");
    assert_eq!(
        run_cli(&[
            "lowerbound", "--n", "256", "--policy", "fixed:auto", "--tmax", "64", "--seed", "3",
            "--trials", "2000", "--out", csv.to_str().unwrap(), "--emit-instance",
            inst.to_str().unwrap()
        ]),
        0
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,p_t,range_i,exact_cond_prob,bound,holds,cumulative_exact,cumulative_bound"
    );
    assert_eq!(lines.count(), 64);
    assert!(text.contains("true"));
    // the emitted instance parses as a protocol-model scenario
    let scn = Scenario::load(&inst).unwrap();
    assert!(matches!(scn.model(), localcast::InterferenceModel::Protocol { .. }));
    // doubling policy also runs end to end
    assert_eq!(
        run_cli(&["lowerbound", "--n", "64", "--policy", "doubling", "--tmax", "256", "--seed", "3"]),
        0
    );
    assert_eq!(run_cli(&["lowerbound", "--policy", "fixed:2.0", "--seed", "1"]), 2);
}

#[test]
fn config_errors_exit_two() {
    assert_eq!(run_cli(&["gen", "--kind", "nonsense", "--seed", "0", "--out", "/tmp/x.json"]), 2);
    assert_eq!(run_cli(&["run", "--scenario", "/nonexistent.json", "--seed", "0", "--out", "/tmp/y.jsonl"]), 2);
    assert_eq!(run_cli(&["sweep", "--kind", "line", "--seed", "0", "--out", "/tmp/z.csv"]), 2);
    assert_eq!(run_cli(&["fit", "--summary", "/nonexistent.csv", "--form", "n", "--seed", "0"]), 2);
}
