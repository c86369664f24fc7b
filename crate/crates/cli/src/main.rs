use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudobo::calibration::CalibrationMethod;
use pseudobo::prelude::*;
use pseudobo_cli::calibrate::{run_calibration, CalibrationConfig, REPORT_FILE};
use pseudobo_cli::config::parse_seeds;
use pseudobo_cli::experiment::{run_experiment, SUMMARY_FILE};
use pseudobo_cli::{CliError, CliResult, ExperimentConfig, Method, ObjectiveSpec};

/// Pseudo-Bayesian optimization experiments.
///
/// Exit codes: 0 success, 2 configuration error, 3 numerical error,
/// 4 external objective failure, 1 other I/O failure.
#[derive(Parser)]
#[command(name = "pseudobo", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimize a benchmark or external objective over several seeds.
    Run(RunArgs),
    /// Calibrated coverage study on the 1D benchmarks.
    Calibrate(CalibrateArgs),
    /// List built-in benchmarks.
    BenchList,
}

#[derive(Args)]
struct RunArgs {
    /// TOML (or .json) experiment file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// PseudoBO-RP, PseudoBO-KR-Hyb, PseudoBO-KR-Hyb-TR or random-search.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    /// Initial Sobol design size.
    #[arg(long)]
    init: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Seed list such as `0..10` or `1,4,7`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall-clock time per evaluation in the traces.
    #[arg(long)]
    timing: bool,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    /// TOML calibration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// GP, RP, KR+Hybrid or NN+MD; repeat or comma-separate. Default: all.
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,
    /// Objective among f1, f2, f3; repeat or comma-separate. Default: all.
    #[arg(long, value_delimiter = ',')]
    benchmark: Vec<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const DEFAULT_BUDGET: usize = 100;
const DEFAULT_INIT: usize = 10;

fn resolve_run(args: &RunArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let (Some(method), Some(bench)) = (&args.method, &args.benchmark) else {
                return Err(CliError::Config("run needs --config or both --method and --benchmark".into()));
            };
            ExperimentConfig::preset(
                Method::parse(method)?,
                ObjectiveSpec::benchmark(bench),
                DEFAULT_BUDGET,
                DEFAULT_INIT,
                vec![0],
                "runs",
            )?
        }
    };
    if args.config.is_some() {
        if let Some(m) = &args.method {
            cfg.method = Method::parse(m)?;
        }
        if let Some(b) = &args.benchmark {
            cfg.objective = ObjectiveSpec::benchmark(b);
        }
    }
    if let Some(v) = args.budget {
        cfg.budget = v;
    }
    if let Some(v) = args.init {
        cfg.n_init = v;
    }
    if let Some(v) = args.batch {
        cfg.batch = v;
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    cfg.timing |= args.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> CliResult<()> {
    let cfg = resolve_run(&args)?;
    if args.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let summary = run_experiment(&cfg)?;
    println!("{} on {} ({}D), budget {}", summary.method, summary.objective, summary.dim, summary.budget);
    for s in &summary.seeds {
        let best = s.final_best.map_or("-".to_string(), |b| format!("{b:.6}"));
        println!("  seed {:>4}  best {best:>14}  {:>8.2}s", s.seed, s.wall_s);
    }
    if let Some(f) = &summary.final_best {
        println!("  median {:.6}  IQR {:.6} [{:.6}, {:.6}]", f.median, f.iqr, f.q1, f.q3);
    }
    println!("wrote {}", cfg.out.join(SUMMARY_FILE).display());
    Ok(())
}

fn calibrate(args: CalibrateArgs) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => CalibrationConfig::load(path)?,
        None => CalibrationConfig::standard((0..10).collect(), "calibration"),
    };
    if !args.method.is_empty() {
        cfg.methods = args
            .method
            .iter()
            .map(|m| CalibrationMethod::parse(m))
            .collect::<Result<_>>()?;
    }
    if !args.benchmark.is_empty() {
        cfg.functions = args.benchmark.clone();
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(o) = &args.out {
        cfg.out = o.clone();
    }
    let report = run_calibration(&cfg)?;
    print!("{}", report.table());
    println!("wrote {}", cfg.out.join(REPORT_FILE).display());
    Ok(())
}

fn bench_list() {
    println!("{:<16} {:>4} {:>18} {:>14}", "name", "dim", "box", "f*");
    for name in ["f1", "f2", "f3", "goldstein-price", "drop-wave", "hartmann6", "ackley-10"] {
        let b = Benchmark::by_name(name).expect("built-in benchmark");
        let (lo, hi) = (b.bounds().lower()[0], b.bounds().upper()[0]);
        let f_star = b.f_star().map_or("-".to_string(), |f| format!("{f:.6}"));
        println!("{:<16} {:>4} {:>18} {:>14}", name, b.dim(), format!("[{lo}, {hi}]^{}", b.dim()), f_star);
    }
    println!("ackley-<d> accepts any dimension d >= 1");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run(a) => run(a),
        Cmd::Calibrate(a) => calibrate(a),
        Cmd::BenchList => {
            bench_list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
