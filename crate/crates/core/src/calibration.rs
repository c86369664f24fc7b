//! Interval calibration: coverage, the multiplier search and the CCR protocol.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::Benchmark;
use crate::dataset::Dataset;
use crate::domain::Direction;
use crate::error::{config, Error, Result};
use crate::ew::{EwFunction, FittedEw, SurrogateSpec, UncertaintySpec};
use crate::acquisition::Acquisition;
use crate::randomized_prior::RpConfig;
use crate::rng::{substream, Purpose};
use crate::surrogates::{BandwidthSchedule, GpConfig, Predictor};
use crate::uncertainty::Uncertainty;

/// Spreads below this are treated as zero.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Default bisection tolerance.
pub const DEFAULT_EPS: f64 = 1e-6;

/// Absolute residual and spread at one labelled point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSample {
    pub residual: f64,
    pub sigma: f64,
}

impl IntervalSample {
    pub fn new(prediction: f64, sigma: f64, y: f64) -> Self {
        Self {
            residual: (y - prediction).abs(),
            sigma,
        }
    }

    pub fn covered(&self, lambda: f64) -> bool {
        if self.sigma < SIGMA_FLOOR && self.residual == 0.0 {
            return true;
        }
        self.residual <= lambda * self.sigma
    }
}

/// Samples at `(xs, ys)` for a predictor and quantifier sharing units.
pub fn interval_samples(
    sp: &dyn Predictor,
    uq: &dyn Uncertainty,
    xs: &[Vec<f64>],
    ys: &[f64],
) -> Vec<IntervalSample> {
    xs.iter()
        .zip(ys)
        .map(|(x, &y)| IntervalSample::new(sp.predict(x), uq.sigma(x), y))
        .collect()
}

/// Fraction of samples with `y ∈ [f̂ - λσ̂, f̂ + λσ̂]`.
pub fn coverage(samples: &[IntervalSample], lambda: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|s| s.covered(lambda)).count() as f64 / samples.len() as f64
}

fn full_coverage(samples: &[IntervalSample], lambda: f64) -> bool {
    samples.iter().all(|s| s.covered(lambda))
}

/// Smallest multiplier giving full coverage, to within `eps`.
///
/// Doubles from 1 until every sample is covered, then bisects between the
/// last uncovered and the first covered multiplier; the covered end is
/// returned.
pub fn calibrate_lambda(samples: &[IntervalSample], eps: f64) -> Result<f64> {
    if samples.is_empty() {
        return config("calibration needs validation data");
    }
    if !(eps > 0.0) {
        return config("calibration eps must be positive");
    }
    for s in samples {
        if !(s.residual.is_finite() && s.sigma.is_finite() && s.sigma >= 0.0) {
            return Err(Error::Numerical(format!("bad interval sample {s:?}")));
        }
        if s.sigma < SIGMA_FLOOR && s.residual > 0.0 {
            return Err(Error::Infeasible(format!(
                "residual {} with zero spread cannot be covered",
                s.residual
            )));
        }
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while !full_coverage(samples, hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > eps {
        let mid = 0.5 * (lo + hi);
        if full_coverage(samples, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub lambda_val: f64,
    pub ccr: f64,
    pub mean_width: f64,
}

/// Calibrates on `validation` and reports coverage and mean width `2λσ̂` on `test`.
pub fn ccr_report(validation: &[IntervalSample], test: &[IntervalSample], eps: f64) -> Result<CalibrationResult> {
    if test.is_empty() {
        return config("calibration needs test data");
    }
    let lambda_val = calibrate_lambda(validation, eps)?;
    let mean_width = test.iter().map(|s| 2.0 * lambda_val * s.sigma).sum::<f64>() / test.len() as f64;
    Ok(CalibrationResult {
        lambda_val,
        ccr: coverage(test, lambda_val),
        mean_width,
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Raises every value below `q3 - k (q3 - q1)` to that threshold.
pub fn winsorize(values: &[f64], k: f64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let floor = q3 - k * (q3 - q1);
    values.iter().map(|&v| v.max(floor)).collect()
}

/// SP/UQ pairs compared by the CCR protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CalibrationMethod {
    #[serde(rename = "GP")]
    Gp,
    #[serde(rename = "RP")]
    Rp,
    #[serde(rename = "KR+Hybrid")]
    KrHybrid,
    #[serde(rename = "NN+MD")]
    NnMd,
}

impl CalibrationMethod {
    pub const ALL: [CalibrationMethod; 4] = [Self::Gp, Self::NnMd, Self::Rp, Self::KrHybrid];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gp => "GP",
            Self::Rp => "RP",
            Self::KrHybrid => "KR+Hybrid",
            Self::NnMd => "NN+MD",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "gp" => Self::Gp,
            "rp" => Self::Rp,
            "krhybrid" | "krhyb" => Self::KrHybrid,
            "nnmd" => Self::NnMd,
            _ => return config(format!("unknown calibration method {s:?}")),
        })
    }

    /// SP and UQ components used by the method.
    pub fn ew(&self, dim: usize) -> EwFunction {
        let (sp, uq) = match self {
            Self::Gp => (SurrogateSpec::Gp(GpConfig::default()), UncertaintySpec::GpStd(GpConfig::default())),
            Self::Rp => {
                let rp = RpConfig::new(dim, 0.075, false);
                (SurrogateSpec::RpMean(rp.clone()), UncertaintySpec::RpStd(rp))
            }
            Self::KrHybrid => (
                SurrogateSpec::KernelRegression(
                    BandwidthSchedule::isotropic(dim, 0.005, 0.02).expect("valid constants"),
                ),
                UncertaintySpec::Hybrid(RpConfig::new(dim, 0.005, true)),
            ),
            Self::NnMd => (SurrogateSpec::NearestNeighbor, UncertaintySpec::MinDistance),
        };
        EwFunction::new(sp, uq, Acquisition::Ei)
    }
}

/// Split sizes; defaults 20 / 10 / 150.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl Default for SplitSizes {
    fn default() -> Self {
        Self {
            train: 20,
            validation: 10,
            test: 150,
        }
    }
}

/// Train / validation / test points (raw units) with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSplit {
    pub train: (Vec<Vec<f64>>, Vec<f64>),
    pub validation: (Vec<Vec<f64>>, Vec<f64>),
    pub test: (Vec<Vec<f64>>, Vec<f64>),
}

impl CalibrationSplit {
    /// Independent uniform draws from the benchmark box.
    pub fn sample(bench: &Benchmark, sizes: SplitSizes, seed: u64) -> Result<Self> {
        if sizes.train == 0 || sizes.validation == 0 || sizes.test == 0 {
            return config("calibration splits must be nonempty");
        }
        let mut rng = substream(seed, Purpose::Calibration, 0);
        let mut draw = |n: usize| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
            let xs: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let u: Vec<f64> = (0..bench.dim()).map(|_| rng.random::<f64>()).collect();
                    bench.bounds().denormalize(&u)
                })
                .collect();
            let ys = xs.iter().map(|x| bench.evaluate(x)).collect::<Result<Vec<_>>>()?;
            Ok((xs, ys))
        };
        Ok(Self {
            train: draw(sizes.train)?,
            validation: draw(sizes.validation)?,
            test: draw(sizes.test)?,
        })
    }
}

/// One seed of the CCR protocol on a benchmark.
pub fn calibration_run(
    bench: &Benchmark,
    method: CalibrationMethod,
    sizes: SplitSizes,
    seed: u64,
    eps: f64,
) -> Result<CalibrationResult> {
    calibration_run_with(bench, &method.ew(bench.dim()), sizes, seed, eps)
}

/// [`calibration_run`] with explicit SP and UQ components.
pub fn calibration_run_with(
    bench: &Benchmark,
    ew: &EwFunction,
    sizes: SplitSizes,
    seed: u64,
    eps: f64,
) -> Result<CalibrationResult> {
    let split = CalibrationSplit::sample(bench, sizes, seed)?;
    let bounds = bench.bounds();
    let unit = |xs: &[Vec<f64>]| xs.iter().map(|x| bounds.normalize(x)).collect::<Result<Vec<_>>>();
    let train_x = unit(&split.train.0)?;
    let data = Arc::new(Dataset::from_points(bench.dim(), Direction::Minimize, &train_x, &split.train.1)?);
    let fitted = ew.fit(data.clone(), seed, 0)?;
    let raw = RawIntervals {
        ew: &fitted,
        data: &data,
    };
    let samples = |xs: &[Vec<f64>], ys: &[f64]| -> Result<Vec<IntervalSample>> {
        Ok(unit(xs)?
            .iter()
            .zip(ys)
            .map(|(x, &y)| raw.sample(x, y))
            .collect())
    };
    let val = samples(&split.validation.0, &split.validation.1)?;
    let test = samples(&split.test.0, &split.test.1)?;
    ccr_report(&val, &test, eps)
}

struct RawIntervals<'a> {
    ew: &'a FittedEw,
    data: &'a Dataset,
}

impl RawIntervals<'_> {
    fn sample(&self, x: &[f64], y: f64) -> IntervalSample {
        let pred = self.data.to_raw(self.ew.predictor().predict(x));
        let sigma = self.data.spread_to_raw(self.ew.uncertainty().sigma(x));
        IntervalSample::new(pred, sigma, y)
    }
}
