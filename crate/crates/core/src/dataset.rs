//! Evaluation history in the unit cube with standardized labels.

use crate::calibration::winsorize;
use crate::domain::{squared_distance, Direction};
use crate::error::{config, Error, Result};

/// Evaluated `(point, value)` pairs.
///
/// Points live in `[0, 1]^d`. Raw values are kept alongside a standardized
/// copy in the maximization frame: `z_i = (o_i - mean) / std` where `o_i` is
/// the value oriented so that larger is better. Surrogates and uncertainty
/// quantifiers only ever see `z`.
#[derive(Debug, Clone)]
pub struct Dataset {
    dim: usize,
    direction: Direction,
    points: Vec<f64>,
    values: Vec<f64>,
    standardized: Vec<f64>,
    mean: f64,
    scale: f64,
    incumbent: Option<usize>,
    winsorize_k: Option<f64>,
}

impl Dataset {
    pub fn new(dim: usize, direction: Direction) -> Self {
        assert!(dim > 0, "dataset dimension must be positive");
        Self {
            dim,
            direction,
            points: Vec::new(),
            values: Vec::new(),
            standardized: Vec::new(),
            mean: 0.0,
            scale: 0.0,
            incumbent: None,
            winsorize_k: None,
        }
    }

    /// Builds a dataset from unit-cube points and raw values.
    pub fn from_points(
        dim: usize,
        direction: Direction,
        points: &[Vec<f64>],
        values: &[f64],
    ) -> Result<Self> {
        if points.len() != values.len() {
            return config(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            ));
        }
        let mut data = Self::new(dim, direction);
        for (p, &v) in points.iter().zip(values) {
            data.push_unstandardized(p, v)?;
        }
        data.restandardize();
        Ok(data)
    }

    /// Clamps the lower (bad) tail of the oriented labels before
    /// standardizing, using `q3 - k (q3 - q1)` as the floor.
    pub fn with_winsorization(mut self, k: f64) -> Self {
        self.winsorize_k = Some(k);
        self.restandardize();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.dim)
    }

    /// Row-major `n x d` storage.
    pub fn flat_points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn standardized(&self) -> &[f64] {
        &self.standardized
    }

    /// Population standard deviation of the oriented labels (0 when constant).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn incumbent_index(&self) -> Option<usize> {
        self.incumbent
    }

    /// Best standardized label, `max Π_f(D_n)` in the maximization frame.
    pub fn incumbent_standardized(&self) -> Option<f64> {
        self.incumbent.map(|i| self.standardized[i])
    }

    /// Appends an evaluated pair. Non-finite values are rejected; the caller
    /// decides whether to record them elsewhere.
    pub fn push(&mut self, point: &[f64], value: f64) -> Result<()> {
        self.push_unstandardized(point, value)?;
        self.restandardize();
        Ok(())
    }

    fn push_unstandardized(&mut self, point: &[f64], value: f64) -> Result<()> {
        if point.len() != self.dim {
            return config(format!(
                "point has {} coordinates, dataset has {}",
                point.len(),
                self.dim
            ));
        }
        if !value.is_finite() {
            return Err(Error::State(format!("non-finite label {value}")));
        }
        if let Some((i, &c)) = point
            .iter()
            .enumerate()
            .find(|(_, c)| !(0.0..=1.0).contains(*c))
        {
            return Err(Error::Domain {
                coordinate: i,
                value: c,
                lower: 0.0,
                upper: 1.0,
            });
        }
        self.points.extend_from_slice(point);
        self.values.push(value);
        let n = self.values.len() - 1;
        match self.incumbent {
            Some(best) if !self.direction.better(value, self.values[best]) => {}
            _ => self.incumbent = Some(n),
        }
        Ok(())
    }

    fn restandardize(&mut self) {
        let mut oriented: Vec<f64> = self
            .values
            .iter()
            .map(|&v| self.direction.orient(v))
            .collect();
        if let (Some(k), false) = (self.winsorize_k, oriented.is_empty()) {
            oriented = winsorize(&oriented, k);
        }
        let n = oriented.len() as f64;
        if oriented.is_empty() {
            self.mean = 0.0;
            self.scale = 0.0;
            self.standardized.clear();
            return;
        }
        let mean = oriented.iter().sum::<f64>() / n;
        let var = oriented.iter().map(|o| (o - mean) * (o - mean)).sum::<f64>() / n;
        let scale = var.sqrt();
        // Treat round-off spread of a constant sample as constant.
        let scale = if scale > 1e-12 * mean.abs().max(1e-300) {
            scale
        } else {
            0.0
        };
        self.mean = mean;
        self.scale = scale;
        self.standardized = oriented
            .iter()
            .map(|o| if scale > 0.0 { (o - mean) / scale } else { 0.0 })
            .collect();
    }

    /// Converts a standardized prediction back to raw objective units.
    pub fn to_raw(&self, z: f64) -> f64 {
        self.direction.orient(self.mean + self.scale * z)
    }

    /// Converts a standardized spread (a UQ value) to raw units.
    pub fn spread_to_raw(&self, sigma: f64) -> f64 {
        self.scale * sigma
    }

    /// Euclidean distance from `x` to the nearest stored point, `Δ(x, X_n)`.
    pub fn min_distance(&self, x: &[f64]) -> f64 {
        self.points()
            .map(|p| squared_distance(x, p))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Index of the nearest stored point; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.points().enumerate() {
            let d = squared_distance(x, p);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, d)| (i, d.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn incumbent_tracks_direction() {
        let pts = vec![vec![0.1], vec![0.5], vec![0.9]];
        let vals = [3.0, 1.0, 2.0];
        let min = Dataset::from_points(1, Direction::Minimize, &pts, &vals).unwrap();
        assert_eq!(min.incumbent_index(), Some(1));
        let max = Dataset::from_points(1, Direction::Maximize, &pts, &vals).unwrap();
        assert_eq!(max.incumbent_index(), Some(0));
        // incumbent is the largest standardized label in both frames
        for d in [&min, &max] {
            let best = d.incumbent_standardized().unwrap();
            assert!(d.standardized().iter().all(|&z| z <= best));
        }
    }

    #[test]
    fn constant_labels_standardize_to_zero() {
        let pts = vec![vec![0.1], vec![0.5]];
        let d = Dataset::from_points(1, Direction::Minimize, &pts, &[7.0, 7.0]).unwrap();
        assert_eq!(d.scale(), 0.0);
        assert_eq!(d.standardized(), &[0.0, 0.0]);
        assert_eq!(d.to_raw(0.0), 7.0);
    }

    #[test]
    fn rejects_non_finite_and_out_of_cube() {
        let mut d = Dataset::new(1, Direction::Minimize);
        assert!(d.push(&[0.5], f64::NAN).is_err());
        assert!(d.push(&[1.5], 0.0).is_err());
        assert!(d.is_empty());
    }

    #[test]
    fn nearest_breaks_ties_low() {
        let pts = vec![vec![0.0], vec![1.0]];
        let d = Dataset::from_points(1, Direction::Minimize, &pts, &[0.0, 1.0]).unwrap();
        assert_eq!(d.nearest(&[0.5]).unwrap().0, 0);
        assert_eq!(d.min_distance(&[0.25]), 0.25);
    }

    proptest! {
        #[test]
        fn standardized_has_zero_mean_unit_std(
            vals in proptest::collection::vec(-1e3f64..1e3, 2..40),
            maximize in any::<bool>(),
        ) {
            let dir = if maximize { Direction::Maximize } else { Direction::Minimize };
            let pts: Vec<Vec<f64>> = (0..vals.len()).map(|i| vec![i as f64 / vals.len() as f64]).collect();
            let d = Dataset::from_points(1, dir, &pts, &vals).unwrap();
            prop_assume!(d.scale() > 0.0);
            let n = vals.len() as f64;
            let z = d.standardized();
            let m = z.iter().sum::<f64>() / n;
            let s = (z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n).sqrt();
            prop_assert!(m.abs() < 1e-9);
            prop_assert!((s - 1.0).abs() < 1e-9);
            for (i, &v) in vals.iter().enumerate() {
                prop_assert!((d.to_raw(z[i]) - v).abs() < 1e-9 * (1.0 + v.abs()));
            }
        }
    }
}
