//! Randomized-prior ensembles over kernel regression.
//!
//! Each member adds a random function `r_m` to a kernel regressor fitted on
//! the residual labels `y_i - r_m(x_i)`. Away from the data the regressor has
//! no support and members disagree exactly as much as their priors do; at the
//! data the prior cancels and every member reproduces the label.

use std::sync::Arc;

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{config, Error, Result};
use crate::surrogates::{bandwidth_rate, Predictor, KERNEL_SUM_FLOOR};
use crate::uncertainty::Uncertainty;

/// A random three-layer tanh network
/// `r(x) = s · (W3 tanh(W2 tanh(W1 x + b1) + b2) + b3)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorField {
    dim: usize,
    width: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    w3: Vec<f64>,
    b3: f64,
    scale: f64,
}

fn glorot<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..fan_in * fan_out)
        .map(|_| rng.random_range(-bound..=bound))
        .collect()
}

impl PriorField {
    /// Glorot-uniform weights, zero biases.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, dim: usize, width: usize, output_scale: f64) -> Result<Self> {
        if dim == 0 || width == 0 {
            return config("prior network needs positive input dimension and width");
        }
        if !(output_scale >= 0.0 && output_scale.is_finite()) {
            return config("prior output scale must be finite and nonnegative");
        }
        Ok(Self {
            dim,
            width,
            w1: glorot(rng, dim, width),
            b1: vec![0.0; width],
            w2: glorot(rng, width, width),
            b2: vec![0.0; width],
            w3: glorot(rng, width, 1),
            b3: 0.0,
            scale: output_scale,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut scratch = vec![0.0; 2 * self.width];
        self.eval_with(x, &mut scratch)
    }

    /// Evaluation reusing a caller buffer of at least `2 * width` entries.
    pub fn eval_with(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let (h1, rest) = scratch.split_at_mut(self.width);
        let h2 = &mut rest[..self.width];
        for (j, h) in h1.iter_mut().enumerate() {
            let row = &self.w1[j * self.dim..(j + 1) * self.dim];
            let a: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            *h = (a + self.b1[j]).tanh();
        }
        for (j, h) in h2.iter_mut().enumerate() {
            let row = &self.w2[j * self.width..(j + 1) * self.width];
            let a: f64 = row.iter().zip(h1.iter()).map(|(w, v)| w * v).sum();
            *h = (a + self.b2[j]).tanh();
        }
        let out: f64 = self.w3.iter().zip(h2.iter()).map(|(w, v)| w * v).sum();
        self.scale * (out + self.b3)
    }
}

/// Ensemble settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RpConfig {
    pub members: usize,
    pub hidden_width: usize,
    pub output_scale: f64,
    /// Per-dimension base bandwidth `h'_0` (unit-cube fraction).
    pub h0: Vec<f64>,
    /// Fit each member on a bootstrap resample of the data.
    pub bootstrap: bool,
}

impl RpConfig {
    pub fn new(dim: usize, h0: f64, bootstrap: bool) -> Self {
        Self {
            members: 20,
            hidden_width: 32,
            output_scale: 1.0,
            h0: vec![h0; dim],
            bootstrap,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.members < 2 {
            return config("randomized prior needs at least two members");
        }
        if self.hidden_width == 0 {
            return config("prior network width must be positive");
        }
        if self.h0.len() != dim || self.h0.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return config(format!("prior bandwidth must have {dim} positive entries"));
        }
        if !(self.output_scale >= 0.0 && self.output_scale.is_finite()) {
            return config("prior output scale must be finite and nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Member {
    prior: PriorField,
    /// Bootstrap multiplicity per data index; `None` means every index once.
    counts: Option<Vec<u32>>,
    residuals: Vec<f64>,
}

/// An ensemble frozen against one dataset snapshot.
#[derive(Debug, Clone)]
pub struct RpEnsemble {
    data: Arc<Dataset>,
    inv_h2: Vec<f64>,
    members: Vec<Member>,
    width: usize,
}

impl RpEnsemble {
    /// Samples `cfg.members` priors from `priors` and, when requested,
    /// bootstrap index multisets from `bootstrap`.
    pub fn fit<R1: Rng + ?Sized, R2: Rng + ?Sized>(
        data: Arc<Dataset>,
        cfg: &RpConfig,
        priors: &mut R1,
        bootstrap: &mut R2,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::State("randomized prior needs data".into()));
        }
        let d = data.dim();
        cfg.validate(d)?;
        let n = data.len();
        let rate = bandwidth_rate(n, d);
        let inv_h2 = cfg.h0.iter().map(|h| 1.0 / (h * rate).powi(2)).collect();
        let mut scratch = vec![0.0; 2 * cfg.hidden_width];
        let mut members = Vec::with_capacity(cfg.members);
        for _ in 0..cfg.members {
            let prior = PriorField::sample(priors, d, cfg.hidden_width, cfg.output_scale)?;
            let counts = cfg.bootstrap.then(|| {
                let mut c = vec![0u32; n];
                for _ in 0..n {
                    c[bootstrap.random_range(0..n)] += 1;
                }
                c
            });
            let residuals = data
                .points()
                .zip(data.standardized())
                .map(|(p, &y)| y - prior.eval_with(p, &mut scratch))
                .collect();
            members.push(Member {
                prior,
                counts,
                residuals,
            });
        }
        Ok(Self {
            data,
            inv_h2,
            members,
            width: cfg.hidden_width,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Bandwidth in use, `h'_0 n^{-1/(2+d)}` per dimension.
    pub fn bandwidth(&self) -> Vec<f64> {
        self.inv_h2.iter().map(|v| v.sqrt().recip()).collect()
    }

    /// Prior values `r_m(x)` for every member.
    pub fn prior_values(&self, x: &[f64]) -> Vec<f64> {
        let mut scratch = vec![0.0; 2 * self.width];
        self.members
            .iter()
            .map(|m| m.prior.eval_with(x, &mut scratch))
            .collect()
    }

    /// Member predictions `r_m(x) + f̂_m(x)`.
    pub fn member_outputs(&self, x: &[f64]) -> Vec<f64> {
        // The bandwidth is shared, so kernel values are computed once and
        // only the nonzero ones are revisited per member.
        let support: Vec<(usize, f64)> = self
            .data
            .points()
            .enumerate()
            .filter_map(|(i, p)| {
                let q: f64 = p
                    .iter()
                    .zip(x)
                    .zip(&self.inv_h2)
                    .map(|((a, b), w)| (a - b) * (a - b) * w)
                    .sum();
                let k = (-0.5 * q).exp();
                (k > 0.0).then_some((i, k))
            })
            .collect();
        let mut scratch = vec![0.0; 2 * self.width];
        self.members
            .iter()
            .map(|m| {
                let (mut num, mut den) = (0.0, 0.0);
                for &(i, k) in &support {
                    let w = match &m.counts {
                        Some(c) => k * c[i] as f64,
                        None => k,
                    };
                    num += w * m.residuals[i];
                    den += w;
                }
                let fit = if den < KERNEL_SUM_FLOOR { 0.0 } else { num / den };
                m.prior.eval_with(x, &mut scratch) + fit
            })
            .collect()
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        mean_std(&self.member_outputs(x)).0
    }

    /// Sample standard deviation (divisor `M - 1`) of member predictions.
    pub fn std(&self, x: &[f64]) -> f64 {
        mean_std(&self.member_outputs(x)).1
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, var.sqrt())
}

impl Predictor for RpEnsemble {
    fn predict(&self, x: &[f64]) -> f64 {
        self.mean(x)
    }
}

impl Uncertainty for RpEnsemble {
    fn sigma(&self, x: &[f64]) -> f64 {
        self.std(x)
    }
}
