use std::sync::Arc;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::surrogates::Predictor;

/// Predicts the label of the closest stored point (lowest index on ties).
#[derive(Debug, Clone)]
pub struct NearestNeighbor {
    data: Arc<Dataset>,
}

impl NearestNeighbor {
    pub fn new(data: Arc<Dataset>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::State("nearest neighbor needs data".into()));
        }
        Ok(Self { data })
    }
}

impl Predictor for NearestNeighbor {
    fn predict(&self, x: &[f64]) -> f64 {
        let (i, _) = self.data.nearest(x).expect("nonempty by construction");
        self.data.standardized()[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Direction;

    fn model(points: &[f64], values: &[f64]) -> (NearestNeighbor, Arc<Dataset>) {
        let pts: Vec<Vec<f64>> = points.iter().map(|&p| vec![p]).collect();
        let d = Arc::new(Dataset::from_points(1, Direction::Maximize, &pts, values).unwrap());
        (NearestNeighbor::new(d.clone()).unwrap(), d)
    }

    #[test]
    fn nearest_examples() {
        let (nn, d) = model(&[0.0, 1.0], &[2.0, 5.0]);
        let z = d.standardized();
        assert_eq!(nn.predict(&[0.0]), z[0]);
        assert_eq!(nn.predict(&[0.4]), z[0]);
        assert_eq!(nn.predict(&[0.5]), z[0]);
        assert_eq!(nn.predict(&[0.6]), z[1]);
    }

    #[test]
    fn empty_is_state_error() {
        let d = Arc::new(Dataset::new(1, Direction::Minimize));
        assert!(NearestNeighbor::new(d).is_err());
    }
}
