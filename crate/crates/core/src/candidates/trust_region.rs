//! Success/failure-driven trust region around the incumbent.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustRegionConfig {
    pub length_init: f64,
    pub length_min: f64,
    pub length_max: f64,
    pub success_tolerance: usize,
    /// Consecutive failures before shrinking; `None` means `max(4, ceil(d / batch))`.
    pub failure_tolerance: Option<usize>,
    /// Relative margin a batch must beat the local incumbent by to count as a success.
    pub improvement_margin: f64,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            length_init: 0.8,
            length_min: 0.5f64.powi(7),
            length_max: 1.6,
            success_tolerance: 3,
            failure_tolerance: None,
            improvement_margin: 1e-3,
        }
    }
}

impl TrustRegionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.length_min && self.length_min <= self.length_init && self.length_init <= self.length_max) {
            return config("trust region needs 0 < length_min <= length_init <= length_max");
        }
        if self.success_tolerance == 0 || self.failure_tolerance == Some(0) {
            return config("trust region tolerances must be positive");
        }
        if !(self.improvement_margin >= 0.0) {
            return config("trust region improvement margin must be nonnegative");
        }
        Ok(())
    }

    pub fn failure_tolerance_for(&self, dim: usize, batch: usize) -> usize {
        self.failure_tolerance
            .unwrap_or_else(|| 4.max(dim.div_ceil(batch.max(1))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustRegionState {
    pub length: f64,
    pub successes: usize,
    pub failures: usize,
    pub restarts: usize,
    /// Set when the length fell below `length_min`.
    pub restart_pending: bool,
    length_min: f64,
    length_max: f64,
    length_init: f64,
    success_tolerance: usize,
    failure_tolerance: usize,
}

impl TrustRegionState {
    pub fn new(cfg: &TrustRegionConfig, dim: usize, batch: usize) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            length: cfg.length_init,
            successes: 0,
            failures: 0,
            restarts: 0,
            restart_pending: false,
            length_min: cfg.length_min,
            length_max: cfg.length_max,
            length_init: cfg.length_init,
            success_tolerance: cfg.success_tolerance,
            failure_tolerance: cfg.failure_tolerance_for(dim, batch),
        })
    }

    pub fn failure_tolerance(&self) -> usize {
        self.failure_tolerance
    }

    /// Fresh region after a restart.
    pub fn restart(&self) -> Self {
        Self {
            length: self.length_init,
            successes: 0,
            failures: 0,
            restarts: self.restarts + 1,
            restart_pending: false,
            ..*self
        }
    }
}

/// Applies one step outcome.
pub fn tr_update(state: &TrustRegionState, improved: bool) -> TrustRegionState {
    let mut s = *state;
    if improved {
        s.successes += 1;
        s.failures = 0;
    } else {
        s.failures += 1;
        s.successes = 0;
    }
    if s.successes >= s.success_tolerance {
        s.length = (2.0 * s.length).min(s.length_max);
        s.successes = 0;
    } else if s.failures >= s.failure_tolerance {
        s.length /= 2.0;
        s.failures = 0;
    }
    s.restart_pending = s.length < s.length_min;
    s
}

/// Whether `candidate` improves on `best` (maximization frame) by more than
/// `margin · |best|`.
pub fn is_improvement(candidate: f64, best: f64, margin: f64) -> bool {
    candidate > best + margin * best.abs()
}
