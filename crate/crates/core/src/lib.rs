//! Pseudo-Bayesian optimization.
//!
//! An optimizer is assembled from three independent parts: a surrogate
//! predictor `f̂`, an uncertainty quantifier `σ̂` and an acquisition rule `g`.
//! Each step maximizes the evaluation worthiness
//! `W_n(x) = g_n(ζ(f̂(x) - max Π_f(D_n)), σ̂(x))` over quasi-random candidates.
//!
//! ```
//! use pseudobo::prelude::*;
//!
//! let bench = Benchmark::by_name("f3").unwrap();
//! let ew = EwFunction::new(
//!     SurrogateSpec::KernelRegression(BandwidthSchedule::isotropic(1, 0.05, 0.2).unwrap()),
//!     UncertaintySpec::Hybrid(RpConfig::new(1, 0.005, true)),
//!     Acquisition::Ei,
//! );
//! let cfg = RunConfig::new(bench.bounds().clone(), 20, 5, 0);
//! let trace = run(&mut &bench, &cfg, &ew, &CandidateOptimizer::new(PerturbConfig::new(1, 1.0))).unwrap();
//! assert_eq!(trace.len(), 20);
//! ```

pub mod acquisition;
pub mod benchmarks;
pub mod calibration;
pub mod candidates;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod ew;
pub mod optimizer;
pub mod randomized_prior;
pub mod rng;
pub mod surrogates;
pub mod trace;
pub mod uncertainty;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::acquisition::{Acquisition, UcbSchedule, Zeta};
    pub use crate::benchmarks::{random_search, Benchmark};
    pub use crate::candidates::{PerturbConfig, TrustRegionConfig};
    pub use crate::dataset::Dataset;
    pub use crate::domain::{Direction, SearchBox};
    pub use crate::error::{Error, Result};
    pub use crate::ew::{EwFunction, SurrogateSpec, UncertaintySpec};
    pub use crate::optimizer::{run, CandidateOptimizer, Objective, RunConfig, Session};
    pub use crate::randomized_prior::RpConfig;
    pub use crate::surrogates::{BandwidthSchedule, GpConfig, Predictor};
    pub use crate::trace::{RunTrace, TraceRecord};
    pub use crate::uncertainty::Uncertainty;
}
