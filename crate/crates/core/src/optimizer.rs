//! The sequential EW-maximization loop.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use crate::candidates::{
    is_improvement, propose_candidates, tr_update, PerturbConfig, Region, SobolStream, TrustRegionConfig,
    TrustRegionState,
};
use crate::dataset::Dataset;
use crate::domain::{Direction, SearchBox};
use crate::error::{config, Error, Result};
use crate::ew::EwFunction;
use crate::rng::{substream, Purpose};
use crate::trace::RunTrace;

/// A black-box objective in raw units.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64>;
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bounds: SearchBox,
    pub budget: usize,
    pub n_init: usize,
    pub batch: usize,
    pub seed: u64,
    pub direction: Direction,
    /// Known optimum; fills the regret columns.
    pub f_star: Option<f64>,
    /// Winsorization constant applied to labels before fitting.
    pub winsorize: Option<f64>,
    /// Record wall-clock seconds per evaluation.
    pub record_time: bool,
}

impl RunConfig {
    pub fn new(bounds: SearchBox, budget: usize, n_init: usize, seed: u64) -> Self {
        Self {
            bounds,
            budget,
            n_init,
            batch: 1,
            seed,
            direction: Direction::Minimize,
            f_star: None,
            winsorize: None,
            record_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return config("n_init must be at least 1");
        }
        if self.budget < self.n_init {
            return config(format!("budget {} is smaller than n_init {}", self.budget, self.n_init));
        }
        if self.batch == 0 {
            return config("batch must be at least 1");
        }
        if let Some(f) = self.f_star {
            if !f.is_finite() {
                return config("f_star must be finite");
            }
        }
        Ok(())
    }
}

/// How EW is maximized at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateOptimizer {
    pub perturb: PerturbConfig,
    pub trust_region: Option<TrustRegionConfig>,
}

impl CandidateOptimizer {
    pub fn new(perturb: PerturbConfig) -> Self {
        Self {
            perturb,
            trust_region: None,
        }
    }
}

/// Indices of the top `k` distinct candidates by score.
///
/// Scores sort descending with ties to the lower index; NaN ranks last.
/// A candidate equal to an already selected one is skipped.
pub fn select_batch(candidates: &[Vec<f64>], scores: &[f64], k: usize) -> Vec<usize> {
    assert_eq!(candidates.len(), scores.len());
    let key = |s: f64| if s.is_nan() { f64::NEG_INFINITY } else { s };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| key(scores[b]).total_cmp(&key(scores[a])).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for i in order {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|&j| candidates[j] != candidates[i]) {
            chosen.push(i);
        }
    }
    chosen
}

/// Step-by-step driver of one run.
pub struct Session {
    cfg: RunConfig,
    ew: EwFunction,
    optimizer: CandidateOptimizer,
    data: Dataset,
    trace: RunTrace,
    init_stream: SobolStream,
    init_remaining: usize,
    ew_steps: u64,
    tr: Option<TrustRegionState>,
    /// Best oriented value and unit point since the last restart.
    local_best: Option<(f64, Vec<f64>)>,
    started: Instant,
}

impl Session {
    pub fn new(cfg: RunConfig, ew: EwFunction, optimizer: CandidateOptimizer) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.bounds.dim();
        ew.validate(d)?;
        optimizer.perturb.validate()?;
        let tr = match &optimizer.trust_region {
            Some(t) => Some(TrustRegionState::new(t, d, cfg.batch)?),
            None => None,
        };
        let init_stream = SobolStream::new(d, &mut substream(cfg.seed, Purpose::InitDesign, 0))?;
        let mut data = Dataset::new(d, cfg.direction);
        if let Some(k) = cfg.winsorize {
            data = data.with_winsorization(k);
        }
        Ok(Self {
            trace: RunTrace::new(d, cfg.direction),
            init_remaining: cfg.n_init,
            cfg,
            ew,
            optimizer,
            data,
            init_stream,
            ew_steps: 0,
            tr,
            local_best: None,
            started: Instant::now(),
        })
    }

    pub fn is_done(&self) -> bool {
        self.trace.len() >= self.cfg.budget
    }

    pub fn evaluations(&self) -> usize {
        self.trace.len()
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn trust_region(&self) -> Option<&TrustRegionState> {
        self.tr.as_ref()
    }

    /// The trace so far, with regret columns when `f_star` is known.
    pub fn trace(&self) -> RunTrace {
        match self.cfg.f_star {
            Some(f) => crate::trace::regret_metrics(&self.trace, f),
            None => self.trace.clone(),
        }
    }

    /// Unit-cube points the next step will evaluate.
    pub fn propose(&self) -> Result<Vec<Vec<f64>>> {
        let left = self.cfg.budget - self.trace.len();
        if self.init_remaining > 0 || self.data.is_empty() {
            let count = self.init_remaining.max(1).min(left);
            return Ok(self.init_stream.clone().take(count));
        }
        let k = self.cfg.batch.min(left);
        let snapshot = Arc::new(self.data.clone());
        let fitted = self.ew.fit(snapshot, self.cfg.seed, self.ew_steps)?;
        let anchor = match (&self.tr, &self.local_best) {
            (Some(_), Some((_, x))) => x.clone(),
            _ => self.data.point(self.data.incumbent_index().expect("nonempty")).to_vec(),
        };
        let region = self.tr.as_ref().map(|t| Region::around(&anchor, t.length));
        let mut sobol = SobolStream::new(
            self.data.dim(),
            &mut substream(self.cfg.seed, Purpose::CandidateSobol, self.ew_steps),
        )?;
        let candidates = propose_candidates(
            &anchor,
            &mut sobol,
            &self.optimizer.perturb,
            region.as_ref(),
            &mut substream(self.cfg.seed, Purpose::Perturbation, self.ew_steps),
        )?;
        let scores: Vec<f64> = candidates.par_iter().map(|c| fitted.score(c)).collect();
        Ok(select_batch(&candidates, &scores, k)
            .into_iter()
            .map(|i| candidates[i].clone())
            .collect())
    }

    /// Evaluates one batch (or the remaining initial design).
    pub fn step<O: Objective + ?Sized>(&mut self, objective: &mut O) -> Result<()> {
        if self.is_done() {
            return Err(Error::State("budget exhausted".into()));
        }
        let from_init = self.init_remaining > 0 || self.data.is_empty();
        let points = self.propose()?;
        let mut batch_best: Option<(f64, Vec<f64>)> = None;
        for unit in points {
            if from_init {
                self.init_stream.next_point();
                self.init_remaining = self.init_remaining.saturating_sub(1);
            }
            let raw = self.cfg.bounds.denormalize(&unit);
            let value = objective.evaluate(&raw)?;
            let elapsed = self.cfg.record_time.then(|| self.started.elapsed().as_secs_f64());
            self.trace.push(raw, value, elapsed);
            if value.is_finite() {
                self.data.push(&unit, value)?;
                let o = self.cfg.direction.orient(value);
                if batch_best.as_ref().is_none_or(|(b, _)| o > *b) {
                    batch_best = Some((o, unit));
                }
            }
        }
        let improved = match (&batch_best, &self.local_best) {
            (Some((o, _)), Some((b, _))) => is_improvement(*o, *b, self.tr_margin()),
            (Some(_), None) => true,
            (None, _) => false,
        };
        if let Some((o, x)) = batch_best {
            if self.local_best.as_ref().is_none_or(|(b, _)| o > *b) {
                self.local_best = Some((o, x));
            }
        }
        if !from_init {
            self.ew_steps += 1;
            if let Some(t) = &self.tr {
                let next = tr_update(t, improved);
                self.tr = Some(if next.restart_pending {
                    self.init_remaining = self.cfg.n_init;
                    self.local_best = None;
                    next.restart()
                } else {
                    next
                });
            }
        }
        Ok(())
    }

    fn tr_margin(&self) -> f64 {
        self.optimizer
            .trust_region
            .as_ref()
            .map_or(0.0, |t| t.improvement_margin)
    }

    /// Runs to the end of the budget.
    pub fn finish<O: Objective + ?Sized>(mut self, objective: &mut O) -> Result<RunTrace> {
        while !self.is_done() {
            self.step(objective)?;
        }
        Ok(self.trace())
    }
}

/// Runs a full optimization and returns its trace.
pub fn run<O: Objective + ?Sized>(
    objective: &mut O,
    cfg: &RunConfig,
    ew: &EwFunction,
    optimizer: &CandidateOptimizer,
) -> Result<RunTrace> {
    Session::new(cfg.clone(), ew.clone(), optimizer.clone())?.finish(objective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::Acquisition;
    use crate::ew::{SurrogateSpec, UncertaintySpec};
    use crate::randomized_prior::RpConfig;
    use crate::surrogates::BandwidthSchedule;

    fn md_ew() -> EwFunction {
        EwFunction::new(SurrogateSpec::NearestNeighbor, UncertaintySpec::MinDistance, Acquisition::Uncertainty)
    }

    fn kr_hyb(d: usize) -> EwFunction {
        EwFunction::new(
            SurrogateSpec::KernelRegression(BandwidthSchedule::isotropic(d, 0.05, 0.2).unwrap()),
            UncertaintySpec::Hybrid(RpConfig::new(d, 0.005, true)),
            Acquisition::Ei,
        )
    }

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum()
    }

    #[test]
    fn init_only_run_is_sobol() {
        let cfg = RunConfig::new(SearchBox::unit(2), 5, 5, 3);
        let t = run(&mut sphere, &cfg, &kr_hyb(2), &CandidateOptimizer::new(PerturbConfig::new(2, 1.0))).unwrap();
        let expected = SobolStream::new(2, &mut substream(3, Purpose::InitDesign, 0)).unwrap().take(5);
        let got: Vec<Vec<f64>> = t.records.iter().map(|r| r.point.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn md_picks_the_midpoint() {
        let data = Dataset::from_points(1, Direction::Minimize, &[vec![0.0], vec![1.0]], &[1.0, 2.0]).unwrap();
        let fitted = md_ew().fit(Arc::new(data), 0, 0).unwrap();
        let cands = vec![vec![0.25], vec![0.5], vec![0.75]];
        let scores: Vec<f64> = cands.iter().map(|c| fitted.score(c)).collect();
        assert_eq!(select_batch(&cands, &scores, 1), vec![1]);
    }

    #[test]
    fn batch_selection_rules() {
        let cands = vec![vec![0.1], vec![0.2], vec![0.2], vec![0.3], vec![0.4]];
        let scores = [1.0, 3.0, 3.0, f64::NAN, 3.0];
        assert_eq!(select_batch(&cands, &scores, 3), vec![1, 4, 0]);
        let scaled: Vec<f64> = scores.iter().map(|s| s * 7.5).collect();
        assert_eq!(select_batch(&cands, &scaled, 3), vec![1, 4, 0]);
    }

    #[test]
    fn constant_objective() {
        let mut cfg = RunConfig::new(SearchBox::unit(2), 10, 3, 1);
        cfg.f_star = Some(7.0);
        let t = run(&mut |_: &[f64]| 7.0, &cfg, &kr_hyb(2), &CandidateOptimizer::new(PerturbConfig::new(2, 1.0))).unwrap();
        assert_eq!(t.len(), 10);
        assert!(t.records.iter().all(|r| r.best_so_far == 7.0 && r.cumulative_regret == Some(0.0)));
    }

    #[test]
    fn runs_are_reproducible() {
        let mut cfg = RunConfig::new(SearchBox::cube(-1.0, 2.0, 3).unwrap(), 25, 5, 11);
        cfg.batch = 2;
        let opt = CandidateOptimizer::new(PerturbConfig::new(3, 0.75));
        let a = run(&mut sphere, &cfg, &kr_hyb(3), &opt).unwrap();
        let b = run(&mut sphere, &cfg, &kr_hyb(3), &opt).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 25);
        let best: Vec<f64> = a.records.iter().map(|r| r.best_so_far).collect();
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn non_finite_values_are_traced_but_not_fitted() {
        let cfg = RunConfig::new(SearchBox::unit(1), 12, 4, 2);
        let mut f = |x: &[f64]| if x[0] < 0.5 { f64::NAN } else { x[0] };
        let mut s = Session::new(cfg, kr_hyb(1), CandidateOptimizer::new(PerturbConfig::new(1, 1.0))).unwrap();
        while !s.is_done() {
            s.step(&mut f).unwrap();
        }
        let t = s.trace();
        let excluded = t.records.iter().filter(|r| r.excluded()).count();
        assert_eq!(s.dataset().len() + excluded, 12);
        assert!(excluded > 0);
    }

    #[test]
    fn trust_region_run_stays_in_budget() {
        let cfg = RunConfig::new(SearchBox::unit(2), 60, 4, 5);
        let opt = CandidateOptimizer {
            perturb: PerturbConfig::new(2, 1.0),
            trust_region: Some(TrustRegionConfig::default()),
        };
        let t = run(&mut sphere, &cfg, &kr_hyb(2), &opt).unwrap();
        assert_eq!(t.len(), 60);
        assert!(t.final_best().unwrap() < 0.01);
    }

    #[test]
    fn objective_errors_propagate() {
        struct Failing(usize);
        impl Objective for Failing {
            fn evaluate(&mut self, _x: &[f64]) -> Result<f64> {
                self.0 += 1;
                if self.0 > 3 {
                    Err(Error::Objective("boom".into()))
                } else {
                    Ok(1.0)
                }
            }
        }
        let cfg = RunConfig::new(SearchBox::unit(1), 10, 5, 0);
        let mut s = Session::new(cfg, md_ew(), CandidateOptimizer::new(PerturbConfig::new(1, 1.0))).unwrap();
        assert!(matches!(s.step(&mut Failing(0)), Err(Error::Objective(_))));
        assert_eq!(s.trace().len(), 3);
    }

    #[test]
    fn rejects_bad_budgets() {
        let opt = CandidateOptimizer::new(PerturbConfig::new(1, 1.0));
        let cfg = RunConfig::new(SearchBox::unit(1), 3, 5, 0);
        assert!(matches!(run(&mut sphere, &cfg, &md_ew(), &opt), Err(Error::Config(_))));
    }
}
