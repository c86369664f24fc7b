//! Calibrated-coverage studies on the 1D benchmarks.

use std::path::PathBuf;

use pseudobo::calibration::{calibration_run, CalibrationMethod, SplitSizes, DEFAULT_EPS};
use pseudobo::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, CliResult};
use crate::experiment::{seed_threads, write_json};

pub const REPORT_FILE: &str = "calibration.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    pub methods: Vec<CalibrationMethod>,
    pub functions: Vec<String>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_sizes")]
    pub sizes: SplitSizes,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub out: PathBuf,
}

fn default_sizes() -> SplitSizes {
    SplitSizes::default()
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl CalibrationConfig {
    /// All four methods on `f1`, `f2`, `f3` with the default split.
    pub fn standard(seeds: Vec<u64>, out: impl Into<PathBuf>) -> Self {
        Self {
            methods: CalibrationMethod::ALL.to_vec(),
            functions: ["f1", "f2", "f3"].map(String::from).to_vec(),
            seeds,
            sizes: SplitSizes::default(),
            eps: DEFAULT_EPS,
            out: out.into(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.methods.is_empty() || self.functions.is_empty() || self.seeds.is_empty() {
            return config_err("calibration needs at least one method, function and seed");
        }
        for f in &self.functions {
            Benchmark::by_name(f)?;
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return config_err("eps must be positive");
        }
        let s = self.sizes;
        if s.train == 0 || s.validation == 0 || s.test == 0 {
            return config_err("split sizes must be positive");
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub method: CalibrationMethod,
    pub function: String,
    pub seed: u64,
    pub ccr: f64,
    pub width: f64,
    pub lambda_val: f64,
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} (±{:.2})", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationAggregate {
    pub method: CalibrationMethod,
    pub function: String,
    pub runs: usize,
    pub ccr: MeanStd,
    pub width: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
    pub aggregates: Vec<CalibrationAggregate>,
}

impl CalibrationReport {
    pub fn aggregate(&self, method: CalibrationMethod, function: &str) -> Option<&CalibrationAggregate> {
        self.aggregates
            .iter()
            .find(|a| a.method == method && a.function == function)
    }

    /// One line per (method, function) in the `mean (±std)` layout.
    pub fn table(&self) -> String {
        let mut s = format!("{:<10} {:<8} {:>16} {:>16}\n", "method", "function", "CCR", "width");
        for a in &self.aggregates {
            s += &format!(
                "{:<10} {:<8} {:>16} {:>16}\n",
                a.method.name(),
                a.function,
                a.ccr.to_string(),
                a.width.to_string()
            );
        }
        s
    }
}

/// Computes the report without writing it.
pub fn calibration_report(cfg: &CalibrationConfig) -> CliResult<CalibrationReport> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for f in &cfg.functions {
        for &m in &cfg.methods {
            for &s in &cfg.seeds {
                jobs.push((f.clone(), m, s));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(seed_threads()?)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let rows: Vec<CalibrationRow> = pool.install(|| {
        jobs.par_iter()
            .map(|(f, m, s)| {
                let bench = Benchmark::by_name(f)?;
                let r = calibration_run(&bench, *m, cfg.sizes, *s, cfg.eps)?;
                Ok(CalibrationRow {
                    method: *m,
                    function: bench.name().to_string(),
                    seed: *s,
                    ccr: r.ccr,
                    width: r.mean_width,
                    lambda_val: r.lambda_val,
                })
            })
            .collect::<CliResult<_>>()
    })?;
    let aggregates = rows
        .chunks(cfg.seeds.len())
        .map(|chunk| {
            let ccr: Vec<f64> = chunk.iter().map(|r| r.ccr).collect();
            let width: Vec<f64> = chunk.iter().map(|r| r.width).collect();
            CalibrationAggregate {
                method: chunk[0].method,
                function: chunk[0].function.clone(),
                runs: chunk.len(),
                ccr: MeanStd::of(&ccr),
                width: MeanStd::of(&width),
            }
        })
        .collect();
    Ok(CalibrationReport { rows, aggregates })
}

/// Computes the report and writes `calibration.json` into `cfg.out`.
pub fn run_calibration(cfg: &CalibrationConfig) -> CliResult<CalibrationReport> {
    let report = calibration_report(cfg)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
    write_json(&cfg.out.join(REPORT_FILE), &report)?;
    Ok(report)
}
