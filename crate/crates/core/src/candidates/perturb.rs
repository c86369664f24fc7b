//! Incumbent-anchored coordinate perturbation of Sobol candidates.

use rand::Rng;

use super::sobol::SobolStream;
use crate::error::{config, Result};

/// Per-step candidate budget `min(100 d, 5000)`.
pub fn n_candidates_for(dim: usize) -> usize {
    (100 * dim).min(5000)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbConfig {
    /// Probability that a coordinate takes the Sobol value.
    pub p_perturb: f64,
    pub n_candidates: usize,
}

impl PerturbConfig {
    pub fn new(dim: usize, p_perturb: f64) -> Self {
        Self {
            p_perturb,
            n_candidates: n_candidates_for(dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_perturb > 0.0 && self.p_perturb <= 1.0) {
            return config(format!("p_perturb must lie in (0, 1], got {}", self.p_perturb));
        }
        if self.n_candidates == 0 {
            return config("n_candidates must be positive");
        }
        Ok(())
    }
}

/// An axis-aligned box inside the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn unit(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    /// The cube of side `length` centred at `center`, intersected with `[0, 1]^d`.
    pub fn around(center: &[f64], length: f64) -> Self {
        let half = 0.5 * length;
        Self {
            lower: center.iter().map(|c| (c - half).max(0.0)).collect(),
            upper: center.iter().map(|c| (c + half).min(1.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    fn clipped(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let lo: Vec<f64> = self.lower.iter().map(|l| l.max(0.0)).collect();
        let hi: Vec<f64> = self.upper.iter().map(|u| u.min(1.0)).collect();
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return config("candidate region is empty");
        }
        Ok((lo, hi))
    }
}

/// Candidates around `incumbent`.
///
/// Each candidate starts at the incumbent; coordinate `i` is replaced by the
/// next Sobol point's coordinate, rescaled into the region, with probability
/// `p_perturb`. When no coordinate fires, one chosen uniformly is forced.
/// Results are clipped to the region.
pub fn propose_candidates<R: Rng + ?Sized>(
    incumbent: &[f64],
    stream: &mut SobolStream,
    cfg: &PerturbConfig,
    region: Option<&Region>,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    let d = incumbent.len();
    if stream.dim() != d {
        return config("Sobol stream dimension does not match the incumbent");
    }
    let full = Region::unit(d);
    let (lo, hi) = region.unwrap_or(&full).clipped()?;
    if lo.len() != d {
        return config("region dimension does not match the incumbent");
    }
    let mut out = Vec::with_capacity(cfg.n_candidates);
    let mut mask = vec![false; d];
    for _ in 0..cfg.n_candidates {
        let u = stream.next_point();
        if cfg.p_perturb >= 1.0 {
            mask.fill(true);
        } else {
            let mut any = false;
            for m in mask.iter_mut() {
                *m = rng.random::<f64>() < cfg.p_perturb;
                any |= *m;
            }
            if !any {
                mask[rng.random_range(0..d)] = true;
            }
        }
        let c = (0..d)
            .map(|i| {
                let v = if mask[i] {
                    lo[i] + u[i] * (hi[i] - lo[i])
                } else {
                    incumbent[i]
                };
                v.clamp(lo[i], hi[i])
            })
            .collect();
        out.push(c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    fn stream(d: usize) -> SobolStream {
        SobolStream::new(d, &mut substream(5, Purpose::CandidateSobol, 0)).unwrap()
    }

    fn propose(inc: &[f64], p: f64, n: usize, region: Option<&Region>) -> Vec<Vec<f64>> {
        let cfg = PerturbConfig {
            p_perturb: p,
            n_candidates: n,
        };
        propose_candidates(inc, &mut stream(inc.len()), &cfg, region, &mut substream(5, Purpose::Perturbation, 0)).unwrap()
    }

    #[test]
    fn candidate_budget() {
        assert_eq!(n_candidates_for(2), 200);
        assert_eq!(n_candidates_for(60), 5000);
    }

    #[test]
    fn full_probability_reproduces_sobol() {
        let c = propose(&[0.3, 0.9], 1.0, 16, None);
        assert_eq!(c, stream(2).take(16));
    }

    #[test]
    fn full_probability_rescales_into_region() {
        let r = Region {
            lower: vec![0.2, 0.5],
            upper: vec![0.4, 1.0],
        };
        let c = propose(&[0.3, 0.9], 1.0, 8, Some(&r));
        for (c, u) in c.iter().zip(stream(2).take(8)) {
            assert!((c[0] - (0.2 + 0.2 * u[0])).abs() < 1e-15);
            assert!((c[1] - (0.5 + 0.5 * u[1])).abs() < 1e-15);
            assert!(r.contains(c));
        }
    }

    #[test]
    fn tiny_probability_changes_exactly_one_coordinate() {
        let inc = [0.5; 6];
        for c in propose(&inc, 1e-9, 1000, None) {
            assert_eq!(c.iter().zip(&inc).filter(|(a, b)| a != b).count(), 1);
        }
    }

    #[test]
    fn perturbed_fraction_matches_probability() {
        let (d, p, n) = (4usize, 0.3, 10_000usize);
        let inc = [0.123_456_789; 4];
        let cands = propose(&inc, p, n, None);
        let changed: usize = cands.iter().map(|c| c.iter().filter(|&&v| v != inc[0]).count()).sum();
        let frac = changed as f64 / (n * d) as f64;
        // one coordinate is forced when none fires
        let q = (1.0 - p).powi(d as i32);
        let per_coord_mean = p + q / d as f64;
        let count_mean = d as f64 * p + q;
        let count_var = d as f64 * p * (1.0 - p) + q * (1.0 - q) - 2.0 * q * d as f64 * p;
        let se = (count_var.max(0.0) / n as f64).sqrt() / d as f64;
        assert!((frac - per_coord_mean).abs() <= 3.0 * se, "frac {frac} expected {per_coord_mean} ({count_mean}) se {se}");
    }

    #[test]
    fn empty_region_is_rejected() {
        let r = Region {
            lower: vec![0.6],
            upper: vec![0.4],
        };
        let cfg = PerturbConfig::new(1, 0.5);
        assert!(propose_candidates(&[0.5], &mut stream(1), &cfg, Some(&r), &mut substream(1, Purpose::Perturbation, 0)).is_err());
    }

    #[test]
    fn region_around_is_clipped() {
        let r = Region::around(&[0.1, 0.9], 0.4);
        assert_eq!(r.lower, vec![0.0, 0.7]);
        assert!((r.upper[0] - 0.3).abs() < 1e-15);
        assert_eq!(r.upper[1], 1.0);
    }
}
