//! Gaussian-kernel (Nadaraya–Watson) regression with data-adaptive bandwidth.

use std::sync::Arc;

use crate::dataset::Dataset;
use crate::error::{config, Error, Result};
use crate::surrogates::Predictor;

/// Kernel sums below this are treated as the zero-support branch.
pub const KERNEL_SUM_FLOOR: f64 = 1e-300;

/// Rate `n^{-1/(2+d)}` shared by every bandwidth in the crate.
#[inline]
pub fn bandwidth_rate(n: usize, dim: usize) -> f64 {
    (n.max(1) as f64).powf(-1.0 / (2.0 + dim as f64))
}

/// Per-dimension bandwidth bases, as fractions of the unit cube.
///
/// The bandwidth at step `n` for a query at distance `delta` from the data
/// interpolates between the shrunk lower and upper bases:
/// `h = (1 - e^{-delta n}) (h_u - h_l) + h_l` with `h_* = h0_* n^{-1/(2+d)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSchedule {
    low: Vec<f64>,
    high: Vec<f64>,
}

impl BandwidthSchedule {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.is_empty() || low.len() != high.len() {
            return config("bandwidth bases must be nonempty and of equal length");
        }
        for (i, (&l, &h)) in low.iter().zip(&high).enumerate() {
            if !(l > 0.0 && l <= h && h.is_finite()) {
                return config(format!(
                    "bandwidth dimension {i}: need 0 < low <= high, got ({l}, {h})"
                ));
            }
        }
        Ok(Self { low, high })
    }

    pub fn isotropic(dim: usize, low: f64, high: f64) -> Result<Self> {
        Self::new(vec![low; dim], vec![high; dim])
    }

    /// A schedule whose bandwidth ignores the distance to the data.
    pub fn fixed(dim: usize, h0: f64) -> Result<Self> {
        Self::isotropic(dim, h0, h0)
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn high(&self) -> &[f64] {
        &self.high
    }

    pub fn is_fixed(&self) -> bool {
        self.low == self.high
    }

    pub fn bandwidth(&self, n: usize, delta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.bandwidth_into(n, delta, &mut out);
        out
    }

    pub fn bandwidth_into(&self, n: usize, delta: f64, out: &mut [f64]) {
        let rate = bandwidth_rate(n, self.dim());
        let blend = 1.0 - (-delta * n as f64).exp();
        for ((o, &l), &h) in out.iter_mut().zip(&self.low).zip(&self.high) {
            let lo = l * rate;
            *o = blend * (h * rate - lo) + lo;
        }
    }
}

/// `exp(-½ Σ (a_i - b_i)² / h_i²)` given precomputed `1 / h_i²`.
#[inline]
pub fn gaussian_kernel(a: &[f64], b: &[f64], inv_h2: &[f64]) -> f64 {
    let q: f64 = a
        .iter()
        .zip(b)
        .zip(inv_h2)
        .map(|((x, y), w)| (x - y) * (x - y) * w)
        .sum();
    (-0.5 * q).exp()
}

/// Nadaraya–Watson regression on a dataset snapshot.
#[derive(Debug, Clone)]
pub struct KernelRegression {
    data: Arc<Dataset>,
    schedule: BandwidthSchedule,
}

impl KernelRegression {
    pub fn new(data: Arc<Dataset>, schedule: BandwidthSchedule) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::State("kernel regression needs data".into()));
        }
        if schedule.dim() != data.dim() {
            return config("bandwidth schedule dimension does not match data");
        }
        Ok(Self { data, schedule })
    }

    fn inverse_squared_bandwidth(&self, x: &[f64]) -> Vec<f64> {
        let n = self.data.len();
        let delta = if self.schedule.is_fixed() {
            0.0
        } else {
            self.data.min_distance(x)
        };
        let mut h = self.schedule.bandwidth(n, delta);
        for v in &mut h {
            *v = 1.0 / (*v * *v);
        }
        h
    }

    /// Normalized weights, or `None` on the zero-support branch.
    pub fn weights(&self, x: &[f64]) -> Option<Vec<f64>> {
        let inv_h2 = self.inverse_squared_bandwidth(x);
        let mut k: Vec<f64> = self
            .data
            .points()
            .map(|p| gaussian_kernel(x, p, &inv_h2))
            .collect();
        let total: f64 = k.iter().sum();
        if total < KERNEL_SUM_FLOOR {
            return None;
        }
        k.iter_mut().for_each(|w| *w /= total);
        Some(k)
    }
}

impl Predictor for KernelRegression {
    fn predict(&self, x: &[f64]) -> f64 {
        let inv_h2 = self.inverse_squared_bandwidth(x);
        let (mut num, mut den) = (0.0, 0.0);
        for (p, &y) in self.data.points().zip(self.data.standardized()) {
            let k = gaussian_kernel(x, p, &inv_h2);
            num += k * y;
            den += k;
        }
        if den < KERNEL_SUM_FLOOR {
            0.0
        } else {
            num / den
        }
    }
}
