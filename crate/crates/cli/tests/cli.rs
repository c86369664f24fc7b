use std::path::Path;
use std::process::{Command, Output};

use pseudobo::prelude::*;
use pseudobo_cli::experiment::{run_experiment, trace_paths, Summary, SUMMARY_FILE};
use pseudobo_cli::tracefile::read_trace_file;
use pseudobo_cli::{ExperimentConfig, Method, ObjectiveSpec};

fn pseudobo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudobo")).args(args).output().unwrap()
}

fn run_args<'a>(out: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["run", "--method", "PseudoBO-KR-Hyb", "--benchmark", "f2", "--budget", "12", "--init", "4", "--out", out];
    v.extend_from_slice(extra);
    v
}

#[test]
fn init_only_run_writes_sobol_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::preset(Method::KrHyb, ObjectiveSpec::benchmark("f1"), 5, 5, vec![0], dir.path()).unwrap();
    run_experiment(&cfg).unwrap();
    let trace = read_trace_file(&trace_paths(&cfg)[0], Direction::Minimize).unwrap();
    assert_eq!(trace.len(), 5);
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = pseudobo(&run_args(out.to_str().unwrap(), &["--seeds", "0..3"]));
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for seed in 0..3 {
        let name = format!("trace_seed{seed}.csv");
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn traces_parse_back_and_match_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(pseudobo(&run_args(out, &["--seeds", "2,5"])).status.success());
    let summary: Summary = serde_json::from_str(&std::fs::read_to_string(dir.path().join(SUMMARY_FILE)).unwrap()).unwrap();
    assert_eq!(summary.seeds.len(), 2);
    for s in &summary.seeds {
        let trace = read_trace_file(&dir.path().join(&s.trace), Direction::Minimize).unwrap();
        assert_eq!(trace.len(), 12);
        assert_eq!(trace.final_best(), s.final_best);
        assert!(trace.records.iter().all(|r| r.simple_regret.is_some() && r.elapsed_s.is_none()));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(pseudobo(&["run", "--method", "nope", "--benchmark", "f1"])), 2);
    assert_eq!(code(pseudobo(&run_args(out, &["--budget", "2"]))), 2);
    assert_eq!(code(pseudobo(&["run", "--method", "rp", "--benchmark", "ackley-0"])), 2);
    let cfg = dir.path().join("ext.toml");
    let ext = ExperimentConfig::preset(
        Method::KrHyb,
        ObjectiveSpec::External {
            command: vec!["sh".into(), "-c".into(), "exit 1".into()],
            lower: vec![0.0],
            upper: vec![1.0],
            direction: Direction::Minimize,
            f_star: None,
        },
        5,
        2,
        vec![0],
        dir.path().join("ext"),
    )
    .unwrap();
    std::fs::write(&cfg, ext.to_toml().unwrap()).unwrap();
    assert_eq!(code(pseudobo(&["run", "--config", cfg.to_str().unwrap()])), 4);
    assert!(Path::new(&dir.path().join("ext/trace_seed0.csv")).exists());
}

#[test]
fn print_config_round_trips() {
    let o = pseudobo(&["run", "--method", "PseudoBO-KR-Hyb-TR", "--benchmark", "hartmann6", "--seeds", "1,3", "--print-config"]);
    assert!(o.status.success());
    let cfg = ExperimentConfig::from_toml(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(cfg.method, Method::KrHybTr);
    assert_eq!(cfg.seeds, vec![1, 3]);
    assert!(cfg.params.trust_region.is_some());
}

#[test]
fn bench_list_names_every_benchmark() {
    let o = pseudobo(&["bench-list"]);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["f1", "f2", "f3", "goldstein-price", "drop-wave", "hartmann6", "ackley-10"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn calibrate_writes_one_row_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let o = pseudobo(&["calibrate", "--method", "NN+MD", "--benchmark", "f1", "--seeds", "0..4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("calibration.json")).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    assert_eq!(report["aggregates"].as_array().unwrap().len(), 1);
}
