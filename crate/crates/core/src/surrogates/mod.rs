//! Surrogate predictors.
//!
//! Every predictor is fitted to an immutable [`Dataset`] snapshot and answers
//! in the dataset's standardized label space unless stated otherwise.

mod gp;
mod kernel;
mod nearest;

use std::fmt;
use std::sync::Arc;

pub use gp::{fit_lengthscale, log_grid, log_marginal_likelihood, GpConfig, GpModel};
pub use kernel::{bandwidth_rate, gaussian_kernel, BandwidthSchedule, KernelRegression, KERNEL_SUM_FLOOR};
pub use nearest::NearestNeighbor;

use crate::dataset::Dataset;
use crate::error::{config, Result};

/// A fitted point predictor `f̂(x; D_n)`.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[f64]) -> f64;
}

impl<P: Predictor + ?Sized> Predictor for Arc<P> {
    fn predict(&self, x: &[f64]) -> f64 {
        (**self).predict(x)
    }
}

/// A predictor returning the same value everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ConstantPredictor(pub f64);

impl Predictor for ConstantPredictor {
    fn predict(&self, _x: &[f64]) -> f64 {
        self.0
    }
}

/// Converts another predictor's standardized output to raw objective units.
pub struct RawPredictor {
    inner: Arc<dyn Predictor>,
    data: Arc<Dataset>,
}

impl RawPredictor {
    pub fn new(inner: Arc<dyn Predictor>, data: Arc<Dataset>) -> Self {
        Self { inner, data }
    }
}

impl Predictor for RawPredictor {
    fn predict(&self, x: &[f64]) -> f64 {
        self.data.to_raw(self.inner.predict(x))
    }
}

pub(crate) fn check_affine_weights(weights: &[f64], nonnegative: bool) -> Result<()> {
    if weights.is_empty() {
        return config("hybrid needs at least one component");
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return config("hybrid weights must be finite");
    }
    if nonnegative && weights.iter().any(|&w| w < 0.0) {
        return config("hybrid weights must be nonnegative");
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return config(format!("hybrid weights sum to {sum}, expected 1"));
    }
    Ok(())
}

/// Affine combination `Σ α_i f̂_i` with `Σ α_i = 1`.
#[derive(Clone)]
pub struct HybridSurrogate {
    components: Vec<Arc<dyn Predictor>>,
    weights: Vec<f64>,
}

impl HybridSurrogate {
    pub fn new(components: Vec<Arc<dyn Predictor>>, weights: Vec<f64>) -> Result<Self> {
        if components.len() != weights.len() {
            return config("hybrid surrogate: one weight per component");
        }
        check_affine_weights(&weights, false)?;
        Ok(Self {
            components,
            weights,
        })
    }
}

impl Predictor for HybridSurrogate {
    fn predict(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(c, w)| w * c.predict(x))
            .sum()
    }
}

/// A known vector function inside a composite surrogate.
#[derive(Clone)]
pub struct Stage {
    inputs: usize,
    outputs: usize,
    func: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl Stage {
    pub fn new(
        inputs: usize,
        outputs: usize,
        func: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            inputs,
            outputs,
            func: Arc::new(func),
        }
    }

    /// A scalar-valued stage.
    pub fn scalar(inputs: usize, func: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(inputs, 1, move |v| vec![func(v)])
    }
}

impl fmt::Debug for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Stage({} -> {})", self.inputs, self.outputs)
    }
}

/// Grey-box surrogate `g_s ∘ … ∘ g_1(f̂_1(x¹), …, f̂_u(xᵘ), x¹, …, xᵘ)`.
///
/// The query point is the concatenation `x¹ ‖ … ‖ xᵘ`. Component predictors
/// are evaluated on their own slice and the first stage receives the `u`
/// predictions followed by the full concatenated input. Whatever units the
/// components answer in are the units the stages see; wrap components in
/// [`RawPredictor`] when the known functions expect objective units.
#[derive(Clone)]
pub struct CompositeSurrogate {
    components: Vec<(Arc<dyn Predictor>, usize)>,
    stages: Vec<Stage>,
}

impl CompositeSurrogate {
    /// `components` pairs each predictor with its input dimension.
    pub fn new(components: Vec<(Arc<dyn Predictor>, usize)>, stages: Vec<Stage>) -> Result<Self> {
        if components.is_empty() {
            return config("composite surrogate needs at least one component");
        }
        if stages.is_empty() {
            return config("composite surrogate needs at least one stage");
        }
        let input_dim: usize = components.iter().map(|(_, d)| d).sum();
        let mut width = components.len() + input_dim;
        for (k, s) in stages.iter().enumerate() {
            if s.inputs != width {
                return config(format!(
                    "stage {k} takes {} inputs but receives {width}",
                    s.inputs
                ));
            }
            width = s.outputs;
        }
        if width != 1 {
            return config(format!("last stage must be scalar, has {width} outputs"));
        }
        Ok(Self { components, stages })
    }

    pub fn input_dim(&self) -> usize {
        self.components.iter().map(|(_, d)| d).sum()
    }
}

impl Predictor for CompositeSurrogate {
    fn predict(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.input_dim(), "composite input has wrong length");
        let mut v = Vec::with_capacity(self.components.len() + x.len());
        let mut offset = 0;
        for (p, d) in &self.components {
            v.push(p.predict(&x[offset..offset + d]));
            offset += d;
        }
        v.extend_from_slice(x);
        for s in &self.stages {
            v = (s.func)(&v);
            assert_eq!(v.len(), s.outputs, "stage returned the wrong arity");
        }
        v[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Direction;

    fn c(v: f64) -> Arc<dyn Predictor> {
        Arc::new(ConstantPredictor(v))
    }

    #[test]
    fn hybrid_corner_weights_reproduce_components() {
        let h = HybridSurrogate::new(vec![c(2.0), c(5.0)], vec![1.0, 0.0]).unwrap();
        assert_eq!(h.predict(&[0.1]), 2.0);
        let h = HybridSurrogate::new(vec![c(2.0), c(2.0)], vec![0.5, 0.5]).unwrap();
        assert_eq!(h.predict(&[0.1]), 2.0);
    }

    #[test]
    fn hybrid_kr_nn_is_convex_combination() {
        let pts = vec![vec![0.1], vec![0.45], vec![0.9]];
        let data = Arc::new(Dataset::from_points(1, Direction::Maximize, &pts, &[1.0, 4.0, 2.0]).unwrap());
        let kr: Arc<dyn Predictor> = Arc::new(
            KernelRegression::new(data.clone(), BandwidthSchedule::isotropic(1, 0.05, 0.2).unwrap()).unwrap(),
        );
        let nn: Arc<dyn Predictor> = Arc::new(NearestNeighbor::new(data).unwrap());
        let h = HybridSurrogate::new(vec![kr.clone(), nn.clone()], vec![0.3, 0.7]).unwrap();
        for x in [0.0, 0.3, 0.6, 1.0] {
            let expected = 0.3 * kr.predict(&[x]) + 0.7 * nn.predict(&[x]);
            assert!((h.predict(&[x]) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn hybrid_rejects_bad_weights() {
        assert!(HybridSurrogate::new(vec![c(1.0), c(2.0)], vec![0.5, 0.6]).is_err());
        assert!(HybridSurrogate::new(vec![c(1.0)], vec![1.0, 0.0]).is_err());
        // affine, not necessarily convex
        assert!(HybridSurrogate::new(vec![c(1.0), c(2.0)], vec![1.5, -0.5]).is_ok());
    }

    #[test]
    fn composite_identity_equals_inner() {
        let s = CompositeSurrogate::new(vec![(c(3.5), 1)], vec![Stage::scalar(2, |v| v[0])]).unwrap();
        assert_eq!(s.predict(&[0.2]), 3.5);
    }

    #[test]
    fn composite_product_and_sum() {
        let prod = CompositeSurrogate::new(
            vec![(c(2.0), 1), (c(-3.0), 2)],
            vec![Stage::scalar(5, |v| v[0] * v[1])],
        )
        .unwrap();
        assert_eq!(prod.predict(&[0.1, 0.2, 0.3]), -6.0);
        let two_stage = CompositeSurrogate::new(
            vec![(c(2.0), 1), (c(-3.0), 1)],
            vec![
                Stage::new(4, 2, |v| vec![v[0] + v[1], v[2]]),
                Stage::scalar(2, |v| v[0] * 10.0 + v[1]),
            ],
        )
        .unwrap();
        assert_eq!(two_stage.predict(&[0.5, 0.7]), -9.5);
    }

    #[test]
    fn composite_sum_of_interpolating_components() {
        let d1 = Arc::new(Dataset::from_points(1, Direction::Maximize, &[vec![0.2], vec![0.8]], &[1.0, 3.0]).unwrap());
        let d2 = Arc::new(Dataset::from_points(1, Direction::Maximize, &[vec![0.4], vec![0.6]], &[10.0, 20.0]).unwrap());
        let f1: Arc<dyn Predictor> = Arc::new(RawPredictor::new(Arc::new(NearestNeighbor::new(d1.clone()).unwrap()), d1));
        let f2: Arc<dyn Predictor> = Arc::new(RawPredictor::new(Arc::new(NearestNeighbor::new(d2.clone()).unwrap()), d2));
        let s = CompositeSurrogate::new(vec![(f1, 1), (f2, 1)], vec![Stage::scalar(4, |v| v[0] + v[1])]).unwrap();
        assert!((s.predict(&[0.8, 0.4]) - 13.0).abs() < 1e-12);
    }

    #[test]
    fn composite_arity_mismatch_is_config_error() {
        assert!(CompositeSurrogate::new(vec![(c(1.0), 2)], vec![Stage::scalar(2, |v| v[0])]).is_err());
        assert!(CompositeSurrogate::new(vec![(c(1.0), 1)], vec![Stage::new(2, 2, |v| v.to_vec())]).is_err());
    }
}
