//! Experiment configuration and the named presets.

use std::fmt;
use std::path::{Path, PathBuf};

use pseudobo::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, CliResult};

/// A named optimizer variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "PseudoBO-RP")]
    Rp,
    #[serde(rename = "PseudoBO-KR-Hyb")]
    KrHyb,
    #[serde(rename = "PseudoBO-KR-Hyb-TR")]
    KrHybTr,
    #[serde(rename = "random-search")]
    RandomSearch,
}

impl Method {
    pub const ALL: [Method; 4] = [Self::Rp, Self::KrHyb, Self::KrHybTr, Self::RandomSearch];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rp => "PseudoBO-RP",
            Self::KrHyb => "PseudoBO-KR-Hyb",
            Self::KrHybTr => "PseudoBO-KR-Hyb-TR",
            Self::RandomSearch => "random-search",
        }
    }

    /// Case-insensitive; the `PseudoBO-` prefix is optional.
    pub fn parse(s: &str) -> CliResult<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        let key = key.strip_prefix("pseudobo-").unwrap_or(&key);
        Ok(match key {
            "rp" => Self::Rp,
            "kr-hyb" => Self::KrHyb,
            "kr-hyb-tr" => Self::KrHybTr,
            "random-search" | "rs" | "random" => Self::RandomSearch,
            _ => return config_err(format!("unknown method {s:?}")),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Perturbation probability anchors `(dim, p)` for synthetic tasks.
const PERTURB_ANCHORS: [(f64, f64); 6] = [(2.0, 1.0), (6.0, 0.75), (10.0, 0.5), (12.0, 0.4), (14.0, 0.35), (60.0, 0.15)];

/// Per-coordinate perturbation probability, piecewise linear in `dim` and
/// held constant outside the anchored range.
pub fn perturb_probability(dim: usize) -> f64 {
    let d = dim as f64;
    let (first, last) = (PERTURB_ANCHORS[0], PERTURB_ANCHORS[PERTURB_ANCHORS.len() - 1]);
    if d <= first.0 {
        return first.1;
    }
    if d >= last.0 {
        return last.1;
    }
    let k = PERTURB_ANCHORS.iter().position(|&(a, _)| a >= d).expect("inside anchor range");
    let ((d0, p0), (d1, p1)) = (PERTURB_ANCHORS[k - 1], PERTURB_ANCHORS[k]);
    p0 + (p1 - p0) * (d - d0) / (d1 - d0)
}

/// Hyperparameters of a variant. Bandwidth bases are fractions of each
/// coordinate's range, i.e. unit-cube values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodParams {
    /// Kernel-regression lower bandwidth base.
    pub h0_lower: f64,
    /// Kernel-regression upper bandwidth base.
    pub h0_upper: f64,
    /// Randomized-prior member bandwidth base.
    pub rp_h0: f64,
    pub members: usize,
    pub hidden_width: usize,
    pub output_scale: f64,
    pub bootstrap: bool,
    pub p_perturb: f64,
    pub n_candidates: usize,
    pub acquisition: Acquisition,
    /// Improvement tolerance; the acquisition default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trust_region: Option<TrustRegionConfig>,
}

impl MethodParams {
    /// Published settings for synthetic tasks in `dim` dimensions.
    pub fn preset(method: Method, dim: usize) -> Self {
        let rp = RpConfig::new(dim, 0.005, true);
        let mut p = Self {
            h0_lower: 0.05,
            h0_upper: 0.2,
            rp_h0: 0.005,
            members: rp.members,
            hidden_width: rp.hidden_width,
            output_scale: rp.output_scale,
            bootstrap: true,
            p_perturb: perturb_probability(dim),
            n_candidates: PerturbConfig::new(dim, 1.0).n_candidates,
            acquisition: Acquisition::Ei,
            tau: None,
            trust_region: None,
        };
        match method {
            Method::Rp => {
                p.rp_h0 = 0.075;
                p.bootstrap = false;
            }
            Method::KrHybTr => p.trust_region = Some(TrustRegionConfig::default()),
            Method::KrHyb | Method::RandomSearch => {}
        }
        p
    }

    pub fn rp_config(&self, dim: usize) -> RpConfig {
        let mut rp = RpConfig::new(dim, self.rp_h0, self.bootstrap);
        rp.members = self.members;
        rp.hidden_width = self.hidden_width;
        rp.output_scale = self.output_scale;
        rp
    }

    /// The EW function for `method`; `None` for random search.
    pub fn ew(&self, method: Method, dim: usize) -> CliResult<Option<EwFunction>> {
        let rp = self.rp_config(dim);
        let (sp, uq) = match method {
            Method::RandomSearch => return Ok(None),
            Method::Rp => (SurrogateSpec::RpMean(rp.clone()), UncertaintySpec::RpStd(rp)),
            Method::KrHyb | Method::KrHybTr => (
                SurrogateSpec::KernelRegression(BandwidthSchedule::isotropic(dim, self.h0_lower, self.h0_upper)?),
                UncertaintySpec::Hybrid(rp),
            ),
        };
        let mut ew = EwFunction::new(sp, uq, self.acquisition.clone());
        if let Some(tau) = self.tau {
            ew.tau = tau;
        }
        ew.validate(dim)?;
        Ok(Some(ew))
    }

    pub fn candidate_optimizer(&self) -> CandidateOptimizer {
        CandidateOptimizer {
            perturb: PerturbConfig {
                p_perturb: self.p_perturb,
                n_candidates: self.n_candidates,
            },
            trust_region: self.trust_region,
        }
    }

    fn validate(&self, method: Method, dim: usize) -> CliResult<()> {
        if method == Method::RandomSearch {
            return Ok(());
        }
        if method == Method::KrHybTr && self.trust_region.is_none() {
            return config_err("PseudoBO-KR-Hyb-TR needs a trust_region table");
        }
        let opt = self.candidate_optimizer();
        opt.perturb.validate()?;
        if let Some(tr) = &opt.trust_region {
            tr.validate()?;
        }
        self.ew(method, dim)?;
        Ok(())
    }
}

/// What is being optimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Benchmark {
        name: String,
    },
    /// A subprocess evaluated once per query; see [`crate::external`].
    External {
        command: Vec<String>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default)]
        direction: Direction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f_star: Option<f64>,
    },
}

impl ObjectiveSpec {
    pub fn benchmark(name: &str) -> Self {
        Self::Benchmark { name: name.to_string() }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Benchmark { name } => name.clone(),
            Self::External { command, .. } => command.join(" "),
        }
    }

    pub fn bounds(&self) -> CliResult<SearchBox> {
        match self {
            Self::Benchmark { name } => Ok(Benchmark::by_name(name)?.bounds().clone()),
            Self::External { lower, upper, .. } => Ok(SearchBox::new(lower.clone(), upper.clone())?),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            Self::Benchmark { .. } => Direction::Minimize,
            Self::External { direction, .. } => *direction,
        }
    }

    pub fn f_star(&self) -> CliResult<Option<f64>> {
        match self {
            Self::Benchmark { name } => Ok(Benchmark::by_name(name)?.f_star()),
            Self::External { f_star, .. } => Ok(*f_star),
        }
    }

    fn validate(&self) -> CliResult<()> {
        if let Self::External { command, .. } = self {
            if command.first().is_none_or(|c| c.is_empty()) {
                return config_err("external objective needs a command");
            }
        }
        self.bounds().map(drop)
    }
}

/// A complete, validated description of an optimization experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub objective: ObjectiveSpec,
    pub budget: usize,
    pub n_init: usize,
    pub batch: usize,
    pub seeds: Vec<u64>,
    /// Winsorization constant for labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub winsorize: Option<f64>,
    /// Fill the `elapsed_s` trace column. Timed traces are not reproducible.
    #[serde(default)]
    pub timing: bool,
    pub out: PathBuf,
    pub params: MethodParams,
}

impl ExperimentConfig {
    /// A preset run with `batch = 1` and parameters for the objective's dimension.
    pub fn preset(
        method: Method,
        objective: ObjectiveSpec,
        budget: usize,
        n_init: usize,
        seeds: Vec<u64>,
        out: impl Into<PathBuf>,
    ) -> CliResult<Self> {
        let dim = objective.bounds()?.dim();
        Ok(Self {
            method,
            objective,
            budget,
            n_init,
            batch: 1,
            seeds,
            winsorize: None,
            timing: false,
            out: out.into(),
            params: MethodParams::preset(method, dim),
        })
    }

    pub fn dim(&self) -> CliResult<usize> {
        Ok(self.objective.bounds()?.dim())
    }

    pub fn validate(&self) -> CliResult<()> {
        self.objective.validate()?;
        if self.seeds.is_empty() {
            return config_err("at least one seed is required");
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return config_err("seeds must be distinct");
        }
        self.run_config(self.seeds[0])?.validate()?;
        if let Some(k) = self.winsorize {
            if !(k > 0.0 && k.is_finite()) {
                return config_err("winsorize constant must be positive");
            }
        }
        self.params.validate(self.method, self.dim()?)
    }

    pub fn run_config(&self, seed: u64) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::new(self.objective.bounds()?, self.budget, self.n_init, seed);
        cfg.batch = self.batch;
        cfg.direction = self.objective.direction();
        cfg.f_star = self.objective.f_star()?;
        cfg.winsorize = self.winsorize;
        cfg.record_time = self.timing;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
        } else {
            Self::from_toml(&text)
        }
    }
}

/// Parses `"0,3,7"`, `"0..10"` (half-open) or a mix such as `"0..3,9"`.
pub fn parse_seeds(spec: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Config(format!("cannot parse seed list {spec:?}"));
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad())?;
                let b: u64 = b.trim().parse().map_err(|_| bad())?;
                if a >= b {
                    return Err(bad());
                }
                seeds.extend(a..b);
            }
            None => seeds.push(part.parse().map_err(|_| bad())?),
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}
