//! Multi-seed experiment execution, trace files and the run summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use pseudobo::calibration::quantile_sorted;
use pseudobo::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method, ObjectiveSpec};
use crate::error::{CliError, CliResult};
use crate::external::ExternalObjective;
use crate::tracefile::write_trace_file;

/// Environment variable capping concurrently running seeds.
pub const THREADS_ENV: &str = "PSEUDOBO_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub final_best: Option<f64>,
    pub evaluations: usize,
    /// Trace file name, relative to the output directory.
    pub trace: String,
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
}

impl Spread {
    /// Type-7 quartiles of the finite values; `None` when there are none.
    pub fn of(values: &[f64]) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let (q1, q3) = (quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.75));
        Some(Self {
            median: quantile_sorted(&v, 0.5),
            q1,
            q3,
            iqr: q3 - q1,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub method: Method,
    pub objective: String,
    pub dim: usize,
    pub budget: usize,
    pub n_init: usize,
    pub batch: usize,
    pub seeds: Vec<SeedSummary>,
    pub final_best: Option<Spread>,
    pub total_wall_s: f64,
}

pub fn trace_file_name(seed: u64) -> String {
    format!("trace_seed{seed}.csv")
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Records every evaluation so partial progress survives a failure.
struct Recording<'a> {
    inner: &'a mut dyn Objective,
    trace: RunTrace,
}

impl Objective for Recording<'_> {
    fn evaluate(&mut self, x: &[f64]) -> pseudobo::Result<f64> {
        let y = self.inner.evaluate(x)?;
        self.trace.push(x.to_vec(), y, None);
        Ok(y)
    }
}

fn objective_for(spec: &ObjectiveSpec) -> CliResult<Box<dyn Objective + Send>> {
    Ok(match spec {
        ObjectiveSpec::Benchmark { name } => Box::new(Benchmark::by_name(name)?),
        ObjectiveSpec::External { command, .. } => Box::new(ExternalObjective::new(command)?),
    })
}

/// Runs one seed. On failure the trace up to the failing evaluation is
/// returned alongside the error.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> (RunTrace, CliResult<()>) {
    let dim = cfg.dim().unwrap_or(0);
    let empty = || RunTrace::new(dim, cfg.objective.direction());
    let mut objective = match objective_for(&cfg.objective) {
        Ok(o) => o,
        Err(e) => return (empty(), Err(e)),
    };
    let run_cfg = match cfg.run_config(seed) {
        Ok(c) => c,
        Err(e) => return (empty(), Err(e)),
    };
    let ew = match cfg.params.ew(cfg.method, dim) {
        Ok(ew) => ew,
        Err(e) => return (empty(), Err(e)),
    };
    match ew {
        None => {
            let mut rec = Recording {
                inner: objective.as_mut(),
                trace: empty(),
            };
            let result = random_search(&mut rec, &run_cfg.bounds, cfg.budget, seed, run_cfg.direction, run_cfg.f_star);
            match result {
                Ok(t) => (t, Ok(())),
                Err(e) => {
                    let mut partial = rec.trace;
                    if let Some(f) = run_cfg.f_star {
                        partial.annotate_regret(f);
                    }
                    (partial, Err(e.into()))
                }
            }
        }
        Some(ew) => {
            let mut session = match Session::new(run_cfg, ew, cfg.params.candidate_optimizer()) {
                Ok(s) => s,
                Err(e) => return (empty(), Err(e.into())),
            };
            while !session.is_done() {
                if let Err(e) = session.step(objective.as_mut()) {
                    return (session.trace(), Err(e.into()));
                }
            }
            (session.trace(), Ok(()))
        }
    }
}

/// Concurrent seed jobs: `PSEUDOBO_THREADS` when set, otherwise all cores.
pub fn seed_threads() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Trace(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Runs every seed, writes one trace per seed and `summary.json` into
/// `cfg.out`. Traces of failed seeds are kept; the first failure in seed
/// order is returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Summary> {
    cfg.validate()?;
    create_dir(&cfg.out)?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(seed_threads()?)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let outcomes: Vec<(SeedSummary, CliResult<()>)> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let t0 = Instant::now();
                let (trace, status) = run_seed(cfg, seed);
                let name = trace_file_name(seed);
                let written = write_trace_file(&cfg.out.join(&name), &trace);
                let summary = SeedSummary {
                    seed,
                    final_best: trace.final_best(),
                    evaluations: trace.len(),
                    trace: name,
                    wall_s: t0.elapsed().as_secs_f64(),
                };
                (summary, status.and(written))
            })
            .collect()
    });
    let mut seeds = Vec::with_capacity(outcomes.len());
    let mut first_error = None;
    for (s, status) in outcomes {
        if let Err(e) = status {
            first_error.get_or_insert(e);
        }
        seeds.push(s);
    }
    if let Some(e) = first_error {
        return Err(e);
    }
    let bests: Vec<f64> = seeds.iter().filter_map(|s| s.final_best).collect();
    let summary = Summary {
        method: cfg.method,
        objective: cfg.objective.label(),
        dim: cfg.dim()?,
        budget: cfg.budget,
        n_init: cfg.n_init,
        batch: cfg.batch,
        final_best: Spread::of(&bests),
        seeds,
        total_wall_s: started.elapsed().as_secs_f64(),
    };
    write_json(&cfg.out.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

/// Trace paths of a finished experiment, in seed order.
pub fn trace_paths(cfg: &ExperimentConfig) -> Vec<PathBuf> {
    cfg.seeds.iter().map(|&s| cfg.out.join(trace_file_name(s))).collect()
}
