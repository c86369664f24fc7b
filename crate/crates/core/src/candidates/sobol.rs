//! Digitally shifted Sobol sequences in Gray-code order.

use rand::Rng;

use super::directions::DIRECTIONS;
use crate::error::{config, Result};

const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// Largest supported dimension.
pub const MAX_SOBOL_DIM: usize = DIRECTIONS.len();

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, x) in v.iter_mut().enumerate() {
            *x = 1 << (31 - k);
        }
        return v;
    }
    let (s, a, m) = DIRECTIONS[dim];
    let s = s as usize;
    for k in 0..BITS {
        v[k] = if k < s {
            m[k] << (31 - k)
        } else {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for l in 1..s {
                if (a >> (s - 1 - l)) & 1 == 1 {
                    x ^= v[k - l];
                }
            }
            x
        };
    }
    v
}

/// A Sobol stream over `[0, 1)^d` with an optional per-dimension XOR shift.
#[derive(Debug, Clone)]
pub struct SobolStream {
    v: Vec<[u32; BITS]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
}

impl SobolStream {
    /// A scrambled stream whose shifts are drawn from `rng`.
    pub fn new<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Self> {
        let mut s = Self::unscrambled(dim)?;
        s.shift = (0..dim).map(|_| rng.random()).collect();
        Ok(s)
    }

    pub fn unscrambled(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_SOBOL_DIM {
            return config(format!("Sobol dimension must be in 1..={MAX_SOBOL_DIM}, got {dim}"));
        }
        Ok(Self {
            v: (0..dim).map(direction_numbers).collect(),
            state: vec![0; dim],
            shift: vec![0; dim],
            index: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Number of points emitted so far.
    pub fn position(&self) -> u64 {
        self.index
    }

    /// The next point as raw 32-bit digits.
    pub fn next_bits(&mut self) -> Vec<u32> {
        assert!(self.index < 1 << BITS, "Sobol stream exhausted");
        if self.index > 0 {
            let c = self.index.trailing_zeros() as usize;
            for (x, v) in self.state.iter_mut().zip(&self.v) {
                *x ^= v[c];
            }
        }
        self.index += 1;
        self.state.iter().zip(&self.shift).map(|(x, s)| x ^ s).collect()
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.next_bits().into_iter().map(|b| b as f64 * SCALE).collect()
    }

    /// `count` consecutive points.
    pub fn take(&mut self, count: usize) -> Vec<Vec<f64>> {
        (0..count).map(|_| self.next_point()).collect()
    }
}

/// `count` consecutive points from `stream`.
pub fn sobol_next(stream: &mut SobolStream, count: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return config("sobol_next needs a positive count");
    }
    Ok(stream.take(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Purpose};

    #[test]
    fn first_points_in_three_dimensions() {
        let mut s = SobolStream::unscrambled(3).unwrap();
        let expected = [
            [0, 0, 0],
            [4, 4, 4],
            [6, 2, 2],
            [2, 6, 6],
            [3, 3, 5],
            [7, 7, 1],
            [5, 1, 7],
            [1, 5, 3],
        ];
        for e in expected {
            let p = s.next_point();
            let scaled: Vec<f64> = p.iter().map(|x| x * 8.0).collect();
            assert_eq!(scaled, e.map(f64::from).to_vec());
        }
    }

    #[test]
    fn matches_reference_at_index_1000() {
        let expected: [u32; 64] = [
            943718400, 415236096, 2227175424, 2906652672, 1203765248, 3896508416, 197132288, 3862953984,
            2151677952, 297795584, 364904448, 1094713344, 692060160, 1648361472, 616562688, 1589641216,
            3091202048, 1480589312, 4257218560, 3116367872, 2243952640, 2361393152, 4081057792, 2319450112,
            2503999488, 3896508416, 171966464, 4206886912, 255852544, 1463812096, 633339904, 624951296,
            1270874112, 2545942528, 3443523584, 3309305856, 3644850176, 3569352704, 1321205760, 2059403264,
            3921674240, 1094713344, 4123000832, 3015704576, 3611295744, 398458880, 3745513472, 3946840064,
            4290772992, 2059403264, 1514143744, 2218786816, 3233808384, 1883242496, 541065216, 3829399552,
            1950351360, 339738624, 3795845120, 2453667840, 1916796928, 2587885568, 1111490560, 1916796928,
        ];
        let mut s = SobolStream::unscrambled(64).unwrap();
        for _ in 0..1000 {
            s.next_bits();
        }
        assert_eq!(s.next_bits(), expected.to_vec());
        for _ in 1001..1023 {
            s.next_bits();
        }
        assert_eq!(
            &s.next_bits()[..8],
            &[4194304, 3233808384, 2629828608, 624951296, 801112064, 1883242496, 599785472, 2654994432]
        );
    }

    #[test]
    fn dyadic_stratification_survives_scrambling() {
        for m in 0..=6u32 {
            let mut s = SobolStream::new(5, &mut substream(m as u64, Purpose::CandidateSobol, 0)).unwrap();
            let pts = s.take(1 << m);
            for j in 0..5 {
                let mut seen = vec![false; 1 << m];
                for p in &pts {
                    let cell = (p[j] * f64::from(1u32 << m)) as usize;
                    assert!(!seen[cell], "dim {j} m {m}");
                    seen[cell] = true;
                }
            }
        }
    }

    #[test]
    fn points_are_in_cube_and_distinct() {
        let mut s = SobolStream::new(2, &mut substream(1, Purpose::CandidateSobol, 0)).unwrap();
        let pts = sobol_next(&mut s, 8).unwrap();
        for (i, p) in pts.iter().enumerate() {
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
            assert!(pts[..i].iter().all(|q| q != p));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = SobolStream::new(4, &mut substream(3, Purpose::CandidateSobol, 0)).unwrap().take(20);
        let b = SobolStream::new(4, &mut substream(3, Purpose::CandidateSobol, 0)).unwrap().take(20);
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unsupported_dimensions() {
        assert!(SobolStream::unscrambled(65).is_err());
        assert!(SobolStream::unscrambled(0).is_err());
        assert!(SobolStream::unscrambled(64).is_ok());
    }
}
