//! Search boxes, optimization direction and the unit-cube mapping.
//!
//! Everything inside the optimizer works in `[0, 1]^d`; raw coordinates only
//! appear at the objective boundary and in traces.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Whether the objective is minimized or maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Minimize,
    Maximize,
}

impl Direction {
    /// Maps a raw value into the maximization frame used internally.
    #[inline]
    pub fn orient(self, value: f64) -> f64 {
        match self {
            Direction::Minimize => -value,
            Direction::Maximize => value,
        }
    }

    /// `true` when `a` is strictly better than `b`.
    #[inline]
    pub fn better(self, a: f64, b: f64) -> bool {
        self.orient(a) > self.orient(b)
    }
}

/// An axis-aligned box `[lower, upper]` in objective units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBox", into = "RawBox")]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl TryFrom<RawBox> for SearchBox {
    type Error = Error;
    fn try_from(raw: RawBox) -> Result<Self> {
        SearchBox::new(raw.lower, raw.upper)
    }
}

impl From<SearchBox> for RawBox {
    fn from(b: SearchBox) -> Self {
        RawBox {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return config("box must have at least one dimension");
        }
        if lower.len() != upper.len() {
            return config(format!(
                "box bounds differ in length ({} vs {})",
                lower.len(),
                upper.len()
            ));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return config(format!("box dimension {i}: need finite lower < upper, got [{l}, {u}]"));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval repeated `dim` times.
    pub fn cube(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn unit(dim: usize) -> Self {
        Self::cube(0.0, 1.0, dim).expect("unit cube is valid")
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Checks that `point` lies in the closed box.
    pub fn check(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return config(format!(
                "point has {} coordinates, box has {}",
                point.len(),
                self.dim()
            ));
        }
        for (i, &p) in point.iter().enumerate() {
            if !(p >= self.lower[i] && p <= self.upper[i]) {
                return Err(Error::Domain {
                    coordinate: i,
                    value: p,
                    lower: self.lower[i],
                    upper: self.upper[i],
                });
            }
        }
        Ok(())
    }

    /// Affine map of a raw point onto the unit cube.
    pub fn normalize(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check(point)?;
        Ok(point
            .iter()
            .enumerate()
            .map(|(i, &p)| ((p - self.lower[i]) / self.width(i)).clamp(0.0, 1.0))
            .collect())
    }

    /// Inverse of [`SearchBox::normalize`]. The unit point is not validated.
    pub fn denormalize(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .enumerate()
            .map(|(i, &u)| {
                if u >= 1.0 {
                    self.upper[i]
                } else {
                    (self.lower[i] + u * self.width(i)).min(self.upper[i])
                }
            })
            .collect()
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_box() -> SearchBox {
        SearchBox::new(vec![0.0, -2.0], vec![2.0, 0.0]).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let b = example_box();
        assert_eq!(b.normalize(&[0.0, -1.0]).unwrap(), vec![0.0, 0.5]);
        assert_eq!(b.normalize(&[2.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(b.normalize(&[1.5, -0.5]).unwrap(), vec![0.75, 0.75]);
    }

    #[test]
    fn normalize_names_violating_coordinate() {
        let err = example_box().normalize(&[1.0, 0.5]).unwrap_err();
        match err {
            Error::Domain { coordinate, .. } => assert_eq!(coordinate, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_degenerate_boxes() {
        assert!(SearchBox::new(vec![1.0], vec![1.0]).is_err());
        assert!(SearchBox::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(SearchBox::new(vec![], vec![]).is_err());
    }

    #[test]
    fn direction_orientation() {
        assert!(Direction::Minimize.better(1.0, 2.0));
        assert!(Direction::Maximize.better(2.0, 1.0));
        assert!(!Direction::Minimize.better(2.0, 2.0));
    }

    proptest! {
        #[test]
        fn normalize_round_trips(
            lo in -1e3f64..1e3,
            width in 1e-3f64..1e3,
            t in 0.0f64..=1.0,
        ) {
            let b = SearchBox::cube(lo, lo + width, 1).unwrap();
            let p = [lo + t * width];
            if b.check(&p).is_ok() {
                let u = b.normalize(&p).unwrap();
                prop_assert!((0.0..=1.0).contains(&u[0]));
                prop_assert!((b.denormalize(&u)[0] - p[0]).abs() <= 1e-12 * (1.0 + p[0].abs()));
            }
        }
    }
}
