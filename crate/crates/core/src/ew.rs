//! Evaluation worthiness `W_n(x) = g_n(ζ(f̂(x) - max Π_f(D_n)), σ̂(x))`.

use std::sync::Arc;

use crate::acquisition::{Acquisition, Zeta};
use crate::dataset::Dataset;
use crate::error::{config, Error, Result};
use crate::randomized_prior::{RpConfig, RpEnsemble};
use crate::rng::{substream, Purpose};
use crate::surrogates::{
    check_affine_weights, BandwidthSchedule, GpConfig, GpModel, HybridSurrogate, KernelRegression,
    NearestNeighbor, Predictor,
};
use crate::uncertainty::{ConvexUncertainty, HybridUncertainty, MinDistance, Uncertainty};

/// Which surrogate predictor to fit.
#[derive(Debug, Clone, PartialEq)]
pub enum SurrogateSpec {
    KernelRegression(BandwidthSchedule),
    NearestNeighbor,
    Gp(GpConfig),
    /// Mean of a randomized-prior ensemble.
    RpMean(RpConfig),
    /// Affine combination of other surrogates.
    Hybrid(Vec<(SurrogateSpec, f64)>),
}

/// Which uncertainty quantifier to fit.
#[derive(Debug, Clone, PartialEq)]
pub enum UncertaintySpec {
    MinDistance,
    GpStd(GpConfig),
    /// Standard deviation of a randomized-prior ensemble.
    RpStd(RpConfig),
    /// Distance-mixed minimum distance and randomized prior.
    Hybrid(RpConfig),
    /// Convex combination of other quantifiers.
    Convex(Vec<(UncertaintySpec, f64)>),
}

/// The components of an EW function, before fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct EwFunction {
    pub surrogate: SurrogateSpec,
    pub uncertainty: UncertaintySpec,
    pub acquisition: Acquisition,
    pub zeta: Zeta,
    pub tau: f64,
}

impl EwFunction {
    /// Uses the acquisition's default tolerance and `ζ = id`.
    pub fn new(surrogate: SurrogateSpec, uncertainty: UncertaintySpec, acquisition: Acquisition) -> Self {
        let tau = acquisition.default_tau();
        Self {
            surrogate,
            uncertainty,
            acquisition,
            zeta: Zeta::Identity,
            tau,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return config("tau must be finite and nonnegative");
        }
        self.zeta.validate()?;
        self.acquisition.validate()?;
        validate_sp(&self.surrogate, dim)?;
        validate_uq(&self.uncertainty, dim)
    }

    /// Fits every component to `data`. Random components draw from
    /// substreams indexed by `iteration`, so a refit at the same iteration
    /// reproduces the same ensemble.
    pub fn fit(&self, data: Arc<Dataset>, seed: u64, iteration: u64) -> Result<FittedEw> {
        self.validate(data.dim())?;
        let incumbent = data
            .incumbent_standardized()
            .ok_or_else(|| Error::State("EW needs data".into()))?;
        let mut ctx = FitContext {
            data,
            seed,
            iteration,
            rp: Vec::new(),
            gp: Vec::new(),
        };
        let predictor = ctx.surrogate(&self.surrogate)?;
        let uncertainty = ctx.uncertainty(&self.uncertainty)?;
        Ok(FittedEw {
            predictor,
            uncertainty,
            incumbent,
            acquisition: self.acquisition.clone(),
            zeta: self.zeta,
            tau: self.tau,
            n: ctx.data.len(),
        })
    }
}

fn validate_sp(s: &SurrogateSpec, dim: usize) -> Result<()> {
    match s {
        SurrogateSpec::KernelRegression(b) if b.dim() != dim => config("bandwidth dimension does not match problem"),
        SurrogateSpec::Gp(g) => g.validate(),
        SurrogateSpec::RpMean(r) => r.validate(dim),
        SurrogateSpec::Hybrid(parts) => {
            check_affine_weights(&parts.iter().map(|p| p.1).collect::<Vec<_>>(), false)?;
            parts.iter().try_for_each(|(p, _)| validate_sp(p, dim))
        }
        _ => Ok(()),
    }
}

fn validate_uq(u: &UncertaintySpec, dim: usize) -> Result<()> {
    match u {
        UncertaintySpec::GpStd(g) => g.validate(),
        UncertaintySpec::RpStd(r) | UncertaintySpec::Hybrid(r) => r.validate(dim),
        UncertaintySpec::Convex(parts) => {
            check_affine_weights(&parts.iter().map(|p| p.1).collect::<Vec<_>>(), true)?;
            parts.iter().try_for_each(|(p, _)| validate_uq(p, dim))
        }
        _ => Ok(()),
    }
}

/// Shares ensembles and GP fits between the surrogate and the quantifier
/// when they use the same configuration.
struct FitContext {
    data: Arc<Dataset>,
    seed: u64,
    iteration: u64,
    rp: Vec<(RpConfig, Arc<RpEnsemble>)>,
    gp: Vec<(GpConfig, Arc<GpModel>)>,
}

impl FitContext {
    fn ensemble(&mut self, cfg: &RpConfig) -> Result<Arc<RpEnsemble>> {
        if let Some((_, e)) = self.rp.iter().find(|(c, _)| c == cfg) {
            return Ok(e.clone());
        }
        let index = (self.iteration << 8) | self.rp.len() as u64;
        let e = Arc::new(RpEnsemble::fit(
            self.data.clone(),
            cfg,
            &mut substream(self.seed, Purpose::Priors, index),
            &mut substream(self.seed, Purpose::Bootstrap, index),
        )?);
        self.rp.push((cfg.clone(), e.clone()));
        Ok(e)
    }

    fn gp(&mut self, cfg: &GpConfig) -> Result<Arc<GpModel>> {
        if let Some((_, g)) = self.gp.iter().find(|(c, _)| c == cfg) {
            return Ok(g.clone());
        }
        let g = Arc::new(GpModel::fit(self.data.clone(), cfg)?);
        self.gp.push((cfg.clone(), g.clone()));
        Ok(g)
    }

    fn surrogate(&mut self, spec: &SurrogateSpec) -> Result<Arc<dyn Predictor>> {
        Ok(match spec {
            SurrogateSpec::KernelRegression(b) => Arc::new(KernelRegression::new(self.data.clone(), b.clone())?),
            SurrogateSpec::NearestNeighbor => Arc::new(NearestNeighbor::new(self.data.clone())?),
            SurrogateSpec::Gp(c) => self.gp(c)?,
            SurrogateSpec::RpMean(c) => self.ensemble(c)?,
            SurrogateSpec::Hybrid(parts) => {
                let mut comps = Vec::with_capacity(parts.len());
                for (p, _) in parts {
                    comps.push(self.surrogate(p)?);
                }
                Arc::new(HybridSurrogate::new(comps, parts.iter().map(|p| p.1).collect())?)
            }
        })
    }

    fn uncertainty(&mut self, spec: &UncertaintySpec) -> Result<Arc<dyn Uncertainty>> {
        Ok(match spec {
            UncertaintySpec::MinDistance => Arc::new(MinDistance::new(self.data.clone())?),
            UncertaintySpec::GpStd(c) => self.gp(c)?,
            UncertaintySpec::RpStd(c) => self.ensemble(c)?,
            UncertaintySpec::Hybrid(c) => {
                let rp = self.ensemble(c)?;
                Arc::new(HybridUncertainty::new(MinDistance::new(self.data.clone())?, rp))
            }
            UncertaintySpec::Convex(parts) => {
                let mut comps = Vec::with_capacity(parts.len());
                for (p, _) in parts {
                    comps.push(self.uncertainty(p)?);
                }
                Arc::new(ConvexUncertainty::new(comps, parts.iter().map(|p| p.1).collect())?)
            }
        })
    }
}

/// An EW function frozen against one dataset snapshot.
#[derive(Clone)]
pub struct FittedEw {
    predictor: Arc<dyn Predictor>,
    uncertainty: Arc<dyn Uncertainty>,
    incumbent: f64,
    acquisition: Acquisition,
    zeta: Zeta,
    tau: f64,
    n: usize,
}

impl FittedEw {
    /// Assembles an EW from already fitted parts, e.g. grey-box composites.
    /// `incumbent` and the predictor must share units; `n` drives step-dependent rules.
    pub fn from_parts(
        predictor: Arc<dyn Predictor>,
        uncertainty: Arc<dyn Uncertainty>,
        incumbent: f64,
        acquisition: Acquisition,
        zeta: Zeta,
        tau: f64,
        n: usize,
    ) -> Result<Self> {
        acquisition.validate()?;
        zeta.validate()?;
        if !(tau >= 0.0 && tau.is_finite()) {
            return config("tau must be finite and nonnegative");
        }
        Ok(Self {
            predictor,
            uncertainty,
            incumbent,
            acquisition,
            zeta,
            tau,
            n,
        })
    }

    pub fn predictor(&self) -> &Arc<dyn Predictor> {
        &self.predictor
    }

    pub fn uncertainty(&self) -> &Arc<dyn Uncertainty> {
        &self.uncertainty
    }

    pub fn incumbent(&self) -> f64 {
        self.incumbent
    }

    /// `(ζ(p), σ̂)` at `x`.
    pub fn inputs(&self, x: &[f64]) -> (f64, f64) {
        let p = self.zeta.apply(self.predictor.predict(x) - self.incumbent);
        (p, self.uncertainty.sigma(x))
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        let (p, s) = self.inputs(x);
        self.acquisition.evaluate(p, s, self.tau, self.n)
    }
}

/// `W_n(x; D_n)` for a fitted EW.
pub fn ew_score(x: &[f64], ew: &FittedEw) -> f64 {
    ew.score(x)
}
