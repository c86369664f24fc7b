//! Inner maximization of EW over quasi-random candidates.

mod directions;
mod perturb;
mod sobol;
mod trust_region;

pub use perturb::{n_candidates_for, propose_candidates, PerturbConfig, Region};
pub use sobol::{sobol_next, SobolStream, MAX_SOBOL_DIM};
pub use trust_region::{is_improvement, tr_update, TrustRegionConfig, TrustRegionState};
