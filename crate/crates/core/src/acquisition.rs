//! Acquisition functions `g_n(p, σ)` over the improvement `p = f̂(x) - max Π_f(D_n)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI as PI_F64};

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};
use crate::surrogates::check_affine_weights;

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI_F64).sqrt()
}

/// Standard normal distribution function.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Probability of improvement.
pub fn pi(p: f64, sigma: f64, tau: f64) -> f64 {
    let d = p - tau;
    if sigma > 0.0 {
        normal_cdf(d / sigma)
    } else if d > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Expected improvement, never negative.
pub fn ei(p: f64, sigma: f64, tau: f64) -> f64 {
    let d = p - tau;
    if sigma > 0.0 {
        let z = d / sigma;
        (sigma * normal_pdf(z) + d * normal_cdf(z)).max(0.0)
    } else {
        d.max(0.0)
    }
}

/// Upper confidence bound in the form `(p - τ) / β_n + σ`.
pub fn ucb(p: f64, sigma: f64, tau: f64, beta: f64) -> f64 {
    (p - tau) / beta + sigma
}

/// Exploration weight rule for UCB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcbSchedule {
    /// `β_n = β_0 √(log(n + 2))`, strictly increasing in `n`.
    Scheduled { beta0: f64 },
    /// A fixed `β`. Not increasing, so outside the improvement-property guarantee.
    Constant { beta: f64 },
}

impl Default for UcbSchedule {
    fn default() -> Self {
        Self::Scheduled { beta0: 2.0 }
    }
}

impl UcbSchedule {
    pub fn beta(&self, n: usize) -> f64 {
        match *self {
            Self::Scheduled { beta0 } => beta0 * ((n as f64 + 2.0).ln()).sqrt(),
            Self::Constant { beta } => beta,
        }
    }

    fn validate(&self) -> Result<()> {
        let b = match *self {
            Self::Scheduled { beta0 } => beta0,
            Self::Constant { beta } => beta,
        };
        if !(b > 0.0 && b.is_finite()) {
            return config("UCB beta must be positive and finite");
        }
        Ok(())
    }
}

/// An acquisition rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acquisition {
    Pi,
    Ei,
    Ucb(UcbSchedule),
    /// `g(p, σ) = σ`: pure exploration.
    Uncertainty,
    /// Convex combination of other rules.
    Hybrid(Vec<(Acquisition, f64)>),
}

impl Acquisition {
    pub fn hybrid(parts: Vec<(Acquisition, f64)>) -> Result<Self> {
        let a = Self::Hybrid(parts);
        a.validate()?;
        Ok(a)
    }

    /// Default tolerance in standardized units.
    pub fn default_tau(&self) -> f64 {
        match self {
            Self::Pi => 0.01,
            _ => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ucb(s) => s.validate(),
            Self::Hybrid(parts) => {
                let w: Vec<f64> = parts.iter().map(|(_, w)| *w).collect();
                check_affine_weights(&w, true)?;
                parts.iter().try_for_each(|(a, _)| a.validate())
            }
            _ => Ok(()),
        }
    }

    /// `g_n(p, σ)` at step `n`.
    pub fn evaluate(&self, p: f64, sigma: f64, tau: f64, n: usize) -> f64 {
        match self {
            Self::Pi => pi(p, sigma, tau),
            Self::Ei => ei(p, sigma, tau),
            Self::Ucb(s) => ucb(p, sigma, tau, s.beta(n)),
            Self::Uncertainty => sigma,
            Self::Hybrid(parts) => parts
                .iter()
                .filter(|(_, w)| *w != 0.0)
                .map(|(a, w)| w * a.evaluate(p, sigma, tau, n))
                .sum(),
        }
    }
}

/// Monotone transform `ζ` applied to the improvement, with `ζ(0) ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Zeta {
    #[default]
    Identity,
    /// `ζ(p) = p + c` with `c ≤ 0`.
    Shift(f64),
}

impl Zeta {
    pub fn apply(&self, p: f64) -> f64 {
        match *self {
            Self::Identity => p,
            Self::Shift(c) => p + c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Shift(c) if !(c <= 0.0 && c.is_finite()) => config("zeta(0) must be finite and nonpositive"),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pi_examples() {
        assert_eq!(pi(1.5, 0.0, 0.5), 1.0);
        assert_abs_diff_eq!(pi(-1.5, 2.0, 0.5), 0.158_655_253_931_457_07, epsilon = 1e-15);
        assert_eq!(pi(0.3, 1.7, 0.3), 0.5);
        assert_eq!(pi(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn ei_examples() {
        assert_eq!(ei(-3.0, 0.0, 0.0), 0.0);
        assert_abs_diff_eq!(ei(0.0, 1.0, 0.0), 0.398_942_280_401_432_7, epsilon = 1e-15);
        assert_eq!(ei(2.5, 0.0, 0.5), 2.0);
        assert!(ei(-40.0, 1.0, 0.0) >= 0.0);
    }

    #[test]
    fn ei_continuous_at_zero_sigma() {
        for d in [-2.0, -1e-3, 0.0, 1e-3, 0.7] {
            assert!((ei(d, 1e-12, 0.0) - d.max(0.0)).abs() <= 1e-9);
        }
    }

    #[test]
    fn ucb_examples() {
        assert_abs_diff_eq!(ucb(2.0, 0.7, 0.5, 3.0), 1.2, epsilon = 1e-15);
        assert_eq!(ucb(0.4, 0.0, 0.4, 2.0), 0.0);
        let s = UcbSchedule::default();
        assert!(s.beta(10) < s.beta(11));
        assert!(ucb(1.0, 0.0, 0.0, s.beta(1 << 40)).abs() < ucb(1.0, 0.0, 0.0, s.beta(1)));
    }

    #[test]
    fn hybrid_af() {
        let h = Acquisition::hybrid(vec![(Acquisition::Ei, 0.5), (Acquisition::Pi, 0.5)]).unwrap();
        assert_eq!(h.evaluate(-1.0, 0.0, 0.0, 3), 0.0);
        let corner = Acquisition::hybrid(vec![(Acquisition::Ei, 1.0), (Acquisition::Pi, 0.0)]).unwrap();
        assert_eq!(corner.evaluate(0.2, 0.3, 0.0, 3), ei(0.2, 0.3, 0.0));
        assert!(Acquisition::hybrid(vec![(Acquisition::Ei, 1.2), (Acquisition::Pi, -0.2)]).is_err());
    }

    #[test]
    fn zeta_rules() {
        assert!(Zeta::Shift(0.1).validate().is_err());
        assert_eq!(Zeta::Shift(-0.5).apply(0.0), -0.5);
        assert_eq!(Zeta::default().apply(1.25), 1.25);
    }

    #[test]
    fn cdf_tails() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!(normal_cdf(-40.0) < 1e-300);
        assert_eq!(normal_cdf(40.0), 1.0);
    }
}
