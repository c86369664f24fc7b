//! Exact Gaussian process regression with a squared-exponential kernel.
//!
//! Labels are the dataset's standardized values with a zero prior mean.
//! The single lengthscale is shared by all unit-cube dimensions and is
//! chosen from a log-spaced grid by exact marginal likelihood.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::Dataset;
use crate::domain::squared_distance;
use crate::error::{config, Error, Result};
use crate::surrogates::Predictor;
use crate::uncertainty::Uncertainty;

const JITTER_ESCALATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    pub lengthscale: f64,
    pub signal_variance: f64,
    pub jitter: f64,
    /// Candidate lengthscales for [`fit_lengthscale`].
    pub lengthscale_grid: Vec<f64>,
    /// Re-select the lengthscale every time the model is fitted.
    pub select_lengthscale: bool,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            lengthscale: 0.2,
            signal_variance: 1.0,
            jitter: 1e-6,
            lengthscale_grid: log_grid(1e-2, 3, 8),
            select_lengthscale: true,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.jitter > 0.0) {
            return config("GP jitter must be positive");
        }
        if self.lengthscale_grid.is_empty() {
            return config("GP lengthscale grid is empty");
        }
        if !(self.lengthscale > 0.0 && self.signal_variance > 0.0) {
            return config("GP lengthscale and signal variance must be positive");
        }
        if self.lengthscale_grid.iter().any(|&l| !(l > 0.0)) {
            return config("GP lengthscale grid must be positive");
        }
        Ok(())
    }
}

/// `decades * per_decade + 1` log-spaced values starting at `start`.
pub fn log_grid(start: f64, decades: usize, per_decade: usize) -> Vec<f64> {
    (0..=decades * per_decade)
        .map(|k| start * 10f64.powf(k as f64 / per_decade as f64))
        .collect()
}

fn se_kernel(a: &[f64], b: &[f64], lengthscale: f64, variance: f64) -> f64 {
    variance * (-0.5 * squared_distance(a, b) / (lengthscale * lengthscale)).exp()
}

fn gram(data: &Dataset, lengthscale: f64, variance: f64) -> DMatrix<f64> {
    let n = data.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = se_kernel(data.point(i), data.point(j), lengthscale, variance);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Cholesky of `K + jitter I`, escalating the jitter by decades on failure.
fn factorize(k: &DMatrix<f64>, jitter: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = jitter;
    for _ in 0..=JITTER_ESCALATIONS {
        let mut m = k.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok((c, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::Numerical(format!(
        "Gram matrix not positive definite after jitter {jitter:e}"
    )))
}

/// Fitted GP posterior on a dataset snapshot.
#[derive(Debug, Clone)]
pub struct GpModel {
    data: Arc<Dataset>,
    lengthscale: f64,
    variance: f64,
    jitter: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

impl GpModel {
    /// Fits the posterior. When `cfg.select_lengthscale` is set and there are
    /// at least two points, the lengthscale comes from [`fit_lengthscale`].
    pub fn fit(data: Arc<Dataset>, cfg: &GpConfig) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::State("GP needs data".into()));
        }
        let lengthscale = if cfg.select_lengthscale && data.len() >= 2 {
            fit_lengthscale(&data, cfg)?
        } else {
            cfg.lengthscale
        };
        Self::fit_with(data, lengthscale, cfg.signal_variance, cfg.jitter)
    }

    pub fn fit_with(data: Arc<Dataset>, lengthscale: f64, variance: f64, jitter: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::State("GP needs data".into()));
        }
        let k = gram(&data, lengthscale, variance);
        let (chol, jitter) = factorize(&k, jitter)?;
        let y = DVector::from_column_slice(data.standardized());
        let alpha = chol.solve(&y);
        Ok(Self {
            data,
            lengthscale,
            variance,
            jitter,
            chol,
            alpha,
        })
    }

    pub fn lengthscale(&self) -> f64 {
        self.lengthscale
    }

    /// Jitter actually used after any escalation.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn cross(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.data.len(),
            self.data
                .points()
                .map(|p| se_kernel(x, p, self.lengthscale, self.variance)),
        )
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        self.cross(x).dot(&self.alpha)
    }

    pub fn variance(&self, x: &[f64]) -> f64 {
        let k = self.cross(x);
        let v = self
            .chol
            .l_dirty()
            .solve_lower_triangular(&k)
            .expect("Cholesky factor has a nonzero diagonal");
        (self.variance - v.norm_squared()).max(0.0)
    }
}

impl Predictor for GpModel {
    fn predict(&self, x: &[f64]) -> f64 {
        self.mean(x)
    }
}

impl Uncertainty for GpModel {
    fn sigma(&self, x: &[f64]) -> f64 {
        self.variance(x).sqrt()
    }
}

/// Exact log marginal likelihood of the standardized labels.
pub fn log_marginal_likelihood(data: &Dataset, lengthscale: f64, cfg: &GpConfig) -> Result<f64> {
    let k = gram(data, lengthscale, cfg.signal_variance);
    let (chol, _) = factorize(&k, cfg.jitter)?;
    let y = DVector::from_column_slice(data.standardized());
    let alpha = chol.solve(&y);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    let n = data.len() as f64;
    Ok(-0.5 * y.dot(&alpha) - log_det - 0.5 * n * (2.0 * PI).ln())
}

/// Grid lengthscale maximizing the log marginal likelihood; the first
/// maximizer wins ties. Grid points whose Gram matrix cannot be factorized
/// are skipped.
pub fn fit_lengthscale(data: &Dataset, cfg: &GpConfig) -> Result<f64> {
    cfg.validate()?;
    if data.len() < 2 {
        return config("lengthscale selection needs at least two points");
    }
    let mut best: Option<(f64, f64)> = None;
    for &l in &cfg.lengthscale_grid {
        let Ok(ll) = log_marginal_likelihood(data, l, cfg) else {
            continue;
        };
        if best.is_none_or(|(_, b)| ll > b) {
            best = Some((l, ll));
        }
    }
    best.map(|(l, _)| l)
        .ok_or_else(|| Error::Numerical("no grid lengthscale admits a factorization".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Direction;

    fn data1d(points: &[f64], values: &[f64]) -> Arc<Dataset> {
        let pts: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        Arc::new(Dataset::from_points(1, Direction::Maximize, &pts, values).unwrap())
    }

    #[test]
    fn grid_has_eight_points_per_decade() {
        let g = log_grid(1e-2, 3, 8);
        assert_eq!(g.len(), 25);
        assert!((g[8] - 0.1).abs() < 1e-15);
        assert!((g[24] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn interpolates_single_point() {
        let d = data1d(&[0.4], &[3.0]);
        // a single point standardizes to 0; use a two-point set and check both
        let gp = GpModel::fit_with(d.clone(), 0.2, 1.0, 1e-10).unwrap();
        assert!((gp.mean(&[0.4]) - d.standardized()[0]).abs() < 1e-6);
        let d = data1d(&[0.1, 0.9], &[3.0, -1.0]);
        let gp = GpModel::fit_with(d.clone(), 0.2, 1.0, 1e-10).unwrap();
        assert!((gp.mean(&[0.1]) - 1.0).abs() < 1e-6);
        assert!((gp.mean(&[0.9]) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn far_from_data_reverts_to_prior() {
        let d = data1d(&[0.0, 0.05], &[1.0, 2.0]);
        let gp = GpModel::fit_with(d, 0.05, 1.0, 1e-6).unwrap();
        assert!(gp.mean(&[1.0]).abs() < 1e-6);
        assert!((gp.sigma(&[1.0]) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn three_collinear_points_match_direct_solve() {
        let d = data1d(&[0.1, 0.5, 0.9], &[1.0, -2.0, 0.5]);
        let (l, jitter) = (0.3, 1e-8);
        let gp = GpModel::fit_with(d.clone(), l, 1.0, jitter).unwrap();
        // Oracle: Gaussian elimination on the 3x3 system.
        let xs = [0.1, 0.5, 0.9];
        let mut a = [[0.0; 4]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = (-0.5 * (xs[i] - xs[j]) * (xs[i] - xs[j]) / (l * l)).exp();
            }
            a[i][i] += jitter;
            a[i][3] = d.standardized()[i];
        }
        for c in 0..3 {
            for r in c + 1..3 {
                let f = a[r][c] / a[c][c];
                for k in c..4 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        let mut w = [0.0; 3];
        for r in (0..3).rev() {
            w[r] = (a[r][3] - (r + 1..3).map(|k| a[r][k] * w[k]).sum::<f64>()) / a[r][r];
        }
        for &x in &[0.3, 0.5, 0.77] {
            let oracle: f64 = (0..3)
                .map(|i| w[i] * (-0.5 * (x - xs[i]) * (x - xs[i]) / (l * l)).exp())
                .sum();
            assert!((gp.mean(&[x]) - oracle).abs() < 1e-6);
        }
        assert!((gp.mean(&[0.5]) - d.standardized()[1]).abs() < 1e-6);
    }

    #[test]
    fn posterior_std_ignores_labels() {
        let a = data1d(&[0.1, 0.5, 0.8], &[1.0, 3.0, 2.0]);
        let b = data1d(&[0.1, 0.5, 0.8], &[2.0, 6.0, 4.0]);
        let ga = GpModel::fit_with(a, 0.2, 1.0, 1e-6).unwrap();
        let gb = GpModel::fit_with(b, 0.2, 1.0, 1e-6).unwrap();
        for x in [0.0, 0.3, 0.65, 1.0] {
            assert_eq!(ga.sigma(&[x]), gb.sigma(&[x]));
        }
        assert!(ga.sigma(&[0.5]) <= (10.0f64 * 1e-6).sqrt());
    }

    #[test]
    fn duplicate_points_still_fit() {
        let d = data1d(&[0.5, 0.5], &[1.0, 1.0]);
        let cfg = GpConfig::default();
        let a = fit_lengthscale(&d, &cfg).unwrap();
        let b = fit_lengthscale(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(cfg.lengthscale_grid.contains(&a));
        GpModel::fit(d, &cfg).unwrap();
    }

    #[test]
    fn too_few_points_for_selection() {
        let d = data1d(&[0.5], &[1.0]);
        assert!(fit_lengthscale(&d, &GpConfig::default()).is_err());
    }
}
