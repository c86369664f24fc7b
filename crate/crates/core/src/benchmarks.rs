//! Synthetic test objectives and the random-search baseline.

use std::f64::consts::{E, PI};

use rand::Rng;

use crate::domain::{Direction, SearchBox};
use crate::error::{config, Result};
use crate::optimizer::Objective;
use crate::rng::{substream, Purpose};
use crate::trace::RunTrace;

/// A named objective on its standard box. All benchmarks are minimized.
#[derive(Debug, Clone)]
pub struct Benchmark {
    name: String,
    bounds: SearchBox,
    func: fn(&[f64]) -> f64,
    f_star: Option<f64>,
    x_star: Option<Vec<f64>>,
}

pub const HARTMANN6_F_STAR: f64 = -3.322_368_011_415_515;
pub const HARTMANN6_X_STAR: [f64; 6] = [0.201_689_51, 0.150_010_69, 0.476_873_97, 0.275_332_43, 0.311_651_62, 0.657_300_53];
pub const F3_X_STAR: f64 = 0.548_563_444_211_690_3;
pub const F3_F_STAR: f64 = -0.869_011_134_989_499_8;

pub fn f1(x: &[f64]) -> f64 {
    let w = 1.0 + (x[0] - 1.0) / 4.0;
    (PI * w).sin().powi(2) + (w - 1.0).powi(2) * (1.0 + (2.0 * PI * w).sin().powi(2))
}

pub fn f2(x: &[f64]) -> f64 {
    let x = x[0];
    -20.0 * (-0.2 * x.abs()).exp() - (2.0 * PI * x).cos().exp() + 20.0 - E
}

pub fn f3(x: &[f64]) -> f64 {
    let x = x[0];
    (10.0 * PI * x).sin() / (2.0 * x) + (x - 1.0).powi(4)
}

pub fn goldstein_price(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let t1 = 1.0 + (a + b + 1.0).powi(2) * (19.0 - 14.0 * a + 3.0 * a * a - 14.0 * b + 6.0 * a * b + 3.0 * b * b);
    let t2 = 30.0 + (2.0 * a - 3.0 * b).powi(2) * (18.0 - 32.0 * a + 12.0 * a * a + 48.0 * b - 36.0 * a * b + 27.0 * b * b);
    t1 * t2
}

pub fn drop_wave(x: &[f64]) -> f64 {
    let r2 = x[0] * x[0] + x[1] * x[1];
    -(1.0 + (12.0 * r2.sqrt()).cos()) / (0.5 * r2 + 2.0)
}

const HARTMANN_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
const HARTMANN_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HARTMANN_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

pub fn hartmann6(x: &[f64]) -> f64 {
    -(0..4)
        .map(|i| {
            let e: f64 = (0..6)
                .map(|j| HARTMANN_A[i][j] * (x[j] - HARTMANN_P[i][j]).powi(2))
                .sum();
            HARTMANN_ALPHA[i] * (-e).exp()
        })
        .sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
}

impl Benchmark {
    fn new(name: &str, bounds: SearchBox, func: fn(&[f64]) -> f64, f_star: f64, x_star: Vec<f64>) -> Self {
        Self {
            name: name.to_string(),
            bounds,
            func,
            f_star: Some(f_star),
            x_star: Some(x_star),
        }
    }

    pub fn f1() -> Self {
        Self::new("f1", interval(-10.0, 10.0), f1, 0.0, vec![1.0])
    }

    pub fn f2() -> Self {
        Self::new("f2", interval(-10.0, 5.0), f2, -2.0 * E, vec![0.0])
    }

    pub fn f3() -> Self {
        Self::new("f3", interval(0.5, 2.5), f3, F3_F_STAR, vec![F3_X_STAR])
    }

    pub fn goldstein_price() -> Self {
        let b = SearchBox::cube(-2.0, 2.0, 2).expect("valid box");
        Self::new("goldstein-price", b, goldstein_price, 3.0, vec![0.0, -1.0])
    }

    pub fn drop_wave() -> Self {
        let b = SearchBox::cube(-5.12, 5.12, 2).expect("valid box");
        Self::new("drop-wave", b, drop_wave, -1.0, vec![0.0, 0.0])
    }

    pub fn hartmann6() -> Self {
        Self::new("hartmann6", SearchBox::unit(6), hartmann6, HARTMANN6_F_STAR, HARTMANN6_X_STAR.to_vec())
    }

    pub fn ackley(dim: usize) -> Result<Self> {
        if dim == 0 {
            return config("Ackley dimension must be positive");
        }
        let b = SearchBox::cube(-5.0, 10.0, dim)?;
        Ok(Self::new(&format!("ackley-{dim}"), b, ackley, 0.0, vec![0.0; dim]))
    }

    /// Looks up a benchmark by name; `ackley` alone is the 10-dimensional one.
    pub fn by_name(name: &str) -> Result<Self> {
        let key = name.trim().to_ascii_lowercase().replace('_', "-");
        Ok(match key.as_str() {
            "f1" => Self::f1(),
            "f2" => Self::f2(),
            "f3" => Self::f3(),
            "goldstein-price" | "goldsteinprice" => Self::goldstein_price(),
            "drop-wave" | "dropwave" => Self::drop_wave(),
            "hartmann6" | "hartmann-6" => Self::hartmann6(),
            "ackley" => Self::ackley(10)?,
            other => match other.strip_prefix("ackley-").or_else(|| other.strip_prefix("ackley")) {
                Some(d) => match d.parse::<usize>() {
                    Ok(d) => Self::ackley(d)?,
                    Err(_) => return config(format!("unknown benchmark {name:?}")),
                },
                None => return config(format!("unknown benchmark {name:?}")),
            },
        })
    }

    /// Canonical names for listing.
    pub fn names() -> &'static [&'static str] {
        &["f1", "f2", "f3", "goldstein-price", "drop-wave", "hartmann6", "ackley-<d>"]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &SearchBox {
        &self.bounds
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    /// Evaluates at a raw point, rejecting points outside the box.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.bounds.check(x)?;
        Ok((self.func)(x))
    }
}

fn interval(lo: f64, hi: f64) -> SearchBox {
    SearchBox::new(vec![lo], vec![hi]).expect("valid interval")
}

impl Objective for Benchmark {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        Benchmark::evaluate(self, x)
    }
}

impl Objective for &Benchmark {
    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        Benchmark::evaluate(self, x)
    }
}

/// Uniform i.i.d. search with the same trace format as the optimizer.
pub fn random_search<O: Objective + ?Sized>(
    objective: &mut O,
    bounds: &SearchBox,
    budget: usize,
    seed: u64,
    direction: Direction,
    f_star: Option<f64>,
) -> Result<RunTrace> {
    if budget == 0 {
        return config("budget must be at least 1");
    }
    let mut rng = substream(seed, Purpose::RandomSearch, 0);
    let mut trace = RunTrace::new(bounds.dim(), direction);
    for _ in 0..budget {
        let u: Vec<f64> = (0..bounds.dim()).map(|_| rng.random::<f64>()).collect();
        let x = bounds.denormalize(&u);
        let v = objective.evaluate(&x)?;
        trace.push(x, v, None);
    }
    if let Some(f) = f_star {
        trace.annotate_regret(f);
    }
    Ok(trace)
}
