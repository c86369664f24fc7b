//! Uncertainty quantifiers.
//!
//! All quantifiers answer in the standardized label space of the dataset they
//! were built from. Use [`Dataset::spread_to_raw`] for objective units.

use std::sync::Arc;

use crate::dataset::Dataset;
use crate::error::{config, Error, Result};
use crate::surrogates::check_affine_weights;

/// A fitted uncertainty quantifier `σ̂(x; D_n) ≥ 0`.
pub trait Uncertainty: Send + Sync {
    fn sigma(&self, x: &[f64]) -> f64;
}

impl<U: Uncertainty + ?Sized> Uncertainty for Arc<U> {
    fn sigma(&self, x: &[f64]) -> f64 {
        (**self).sigma(x)
    }
}

/// `σ_MD(x) = std(labels) · Δ(x, X_n)`.
#[derive(Debug, Clone)]
pub struct MinDistance {
    data: Arc<Dataset>,
    spread: f64,
}

impl MinDistance {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::State("minimum-distance UQ needs data".into()));
        }
        let spread = population_std(data.standardized());
        Ok(Self { data, spread })
    }

    /// Population standard deviation of the standardized labels.
    pub fn spread(&self) -> f64 {
        self.spread
    }

    pub fn data(&self) -> &Arc<Dataset> {
        &self.data
    }
}

impl Uncertainty for MinDistance {
    fn sigma(&self, x: &[f64]) -> f64 {
        if self.spread == 0.0 {
            return 0.0;
        }
        self.spread * self.data.min_distance(x)
    }
}

pub(crate) fn population_std(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Mixing weight `α_n = e^{-Δ n}`.
#[inline]
pub fn alpha_mix(delta: f64, n: usize) -> f64 {
    (-delta * n as f64).exp()
}

/// `σ_Hyb = α_n σ_MD + (1 - α_n) σ_RP` with `α_n` from the distance to the
/// full history.
#[derive(Clone)]
pub struct HybridUncertainty {
    md: MinDistance,
    rp: Arc<dyn Uncertainty>,
}

impl HybridUncertainty {
    pub fn new(md: MinDistance, rp: Arc<dyn Uncertainty>) -> Self {
        Self { md, rp }
    }

    /// Returns `(α, σ_MD, σ_RP)`; `σ_RP` is not evaluated when `α == 1`.
    pub fn parts(&self, x: &[f64]) -> (f64, f64, f64) {
        let delta = self.md.data.min_distance(x);
        let alpha = alpha_mix(delta, self.md.data.len());
        let md = self.md.spread * delta;
        let rp = if alpha < 1.0 { self.rp.sigma(x) } else { 0.0 };
        (alpha, md, rp)
    }
}

impl Uncertainty for HybridUncertainty {
    fn sigma(&self, x: &[f64]) -> f64 {
        let (alpha, md, rp) = self.parts(x);
        mix(alpha, md, rp)
    }
}

/// `α a + (1 - α) b`, dropping the second term when `α == 1`.
#[inline]
pub fn mix(alpha: f64, a: f64, b: f64) -> f64 {
    if alpha >= 1.0 {
        a
    } else {
        alpha * a + (1.0 - alpha) * b
    }
}

/// Convex combination `Σ α_i σ̂_i` with nonnegative weights summing to one.
#[derive(Clone)]
pub struct ConvexUncertainty {
    components: Vec<Arc<dyn Uncertainty>>,
    weights: Vec<f64>,
}

impl ConvexUncertainty {
    pub fn new(components: Vec<Arc<dyn Uncertainty>>, weights: Vec<f64>) -> Result<Self> {
        if components.len() != weights.len() {
            return config("hybrid UQ: one weight per component");
        }
        check_affine_weights(&weights, true)?;
        Ok(Self {
            components,
            weights,
        })
    }
}

impl Uncertainty for ConvexUncertainty {
    fn sigma(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(c, w)| w * c.sigma(x))
            .sum()
    }
}

/// Grey-box UQ: the maximum of per-component quantifiers, each evaluated on
/// its own slice of the concatenated input.
#[derive(Clone)]
pub struct CompositeUncertainty {
    components: Vec<(Arc<dyn Uncertainty>, usize)>,
}

impl CompositeUncertainty {
    pub fn new(components: Vec<(Arc<dyn Uncertainty>, usize)>) -> Result<Self> {
        if components.is_empty() {
            return config("composite UQ needs at least one component");
        }
        Ok(Self { components })
    }

    pub fn input_dim(&self) -> usize {
        self.components.iter().map(|(_, d)| d).sum()
    }
}

impl Uncertainty for CompositeUncertainty {
    fn sigma(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.input_dim(), "composite input has wrong length");
        let mut offset = 0;
        let mut best = 0.0f64;
        for (u, d) in &self.components {
            best = best.max(u.sigma(&x[offset..offset + d]));
            offset += d;
        }
        best
    }
}

/// `max_i σ̂_i(x^(i))` over explicitly supplied parts.
pub fn composite_uq(parts: &[&[f64]], uqs: &[&dyn Uncertainty]) -> Result<f64> {
    if parts.is_empty() || parts.len() != uqs.len() {
        return config(format!(
            "composite UQ: {} parts for {} quantifiers",
            parts.len(),
            uqs.len()
        ));
    }
    Ok(parts
        .iter()
        .zip(uqs)
        .map(|(x, u)| u.sigma(x))
        .fold(0.0, f64::max))
}
