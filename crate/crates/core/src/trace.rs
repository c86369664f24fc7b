//! Per-evaluation run records and regret bookkeeping.

use serde::{Deserialize, Serialize};

use crate::domain::Direction;

/// One objective evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// 1-based evaluation counter.
    pub iter: usize,
    /// Query point in objective units.
    pub point: Vec<f64>,
    pub value: f64,
    /// Best finite value seen so far; NaN until the first finite value.
    pub best_so_far: f64,
    pub simple_regret: Option<f64>,
    pub cumulative_regret: Option<f64>,
    /// Wall-clock seconds since the run started, when timing is recorded.
    pub elapsed_s: Option<f64>,
}

impl TraceRecord {
    /// Non-finite evaluations are kept in the trace but never fitted.
    pub fn excluded(&self) -> bool {
        !self.value.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub dim: usize,
    pub direction: Direction,
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn new(dim: usize, direction: Direction) -> Self {
        Self {
            dim,
            direction,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends an evaluation, maintaining `best_so_far`.
    pub fn push(&mut self, point: Vec<f64>, value: f64, elapsed_s: Option<f64>) {
        let prev = self.records.last().map_or(f64::NAN, |r| r.best_so_far);
        let best = if !value.is_finite() {
            prev
        } else if prev.is_nan() || self.direction.better(value, prev) {
            value
        } else {
            prev
        };
        self.records.push(TraceRecord {
            iter: self.records.len() + 1,
            point,
            value,
            best_so_far: best,
            simple_regret: None,
            cumulative_regret: None,
            elapsed_s,
        });
    }

    pub fn final_best(&self) -> Option<f64> {
        self.records
            .last()
            .map(|r| r.best_so_far)
            .filter(|b| !b.is_nan())
    }

    /// Fills in the regret columns against a known optimum.
    ///
    /// Simple regret is `|best_so_far - f*|`; cumulative regret sums the
    /// per-query gap `|f(x_s) - f*|`. Non-finite queries contribute nothing
    /// to the cumulative sum and leave simple regret undefined until the
    /// first finite value.
    pub fn annotate_regret(&mut self, f_star: f64) {
        let mut cumulative = 0.0;
        for r in &mut self.records {
            if r.value.is_finite() {
                cumulative += (r.value - f_star).abs();
            }
            r.cumulative_regret = Some(cumulative);
            r.simple_regret = if r.best_so_far.is_nan() {
                None
            } else {
                Some((r.best_so_far - f_star).abs())
            };
        }
    }
}

/// Returns a copy of `trace` with regret columns filled in.
pub fn regret_metrics(trace: &RunTrace, f_star: f64) -> RunTrace {
    let mut out = trace.clone();
    out.annotate_regret(f_star);
    out
}
