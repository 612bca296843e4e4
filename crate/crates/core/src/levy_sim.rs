//! Simulation of compound Poisson paths (exact, jump representation) and of
//! Brownian motion on a dyadic grid of `[0, 1]`.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Largest supported grid exponent.
pub const MAX_GRID_LOG2: u32 = 24;

/// Above this rate the Poisson draw switches from sequential inversion to
/// rejection sampling.
const INVERSION_MAX_LAMBDA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    /// Compound Poisson.
    Cp,
    /// Brownian motion.
    Bm,
}

impl ProcessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProcessKind::Cp => "cp",
            ProcessKind::Bm => "bm",
        }
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cp" => Ok(ProcessKind::Cp),
            "bm" => Ok(ProcessKind::Bm),
            other => Err(Error::invalid(
                "process",
                format!("unknown process `{other}` (expected cp or bm)"),
            )),
        }
    }
}

/// Law of the jump heights. Zero mean with a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JumpLaw {
    Gaussian { variance: f64 },
}

impl JumpLaw {
    pub fn gaussian(variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::invalid(
                "variance",
                format!("jump variance must be positive and finite, got {variance}"),
            ));
        }
        Ok(JumpLaw::Gaussian { variance })
    }

    /// Jump variance `sigma0_sq / lambda`, giving `Var s(1) = sigma0_sq`.
    pub fn normalized(sigma0_sq: f64, lambda: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("sigma0_sq", sigma0_sq)?;
        JumpLaw::gaussian(sigma0_sq / lambda)
    }

    pub fn variance(&self) -> f64 {
        match *self {
            JumpLaw::Gaussian { variance } => variance,
        }
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        match *self {
            JumpLaw::Gaussian { variance } => {
                let z: f64 = stream.sample(StandardNormal);
                z * variance.sqrt()
            }
        }
    }
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

/// Draws `N ~ Poisson(lambda)`.
pub fn poisson_count(lambda: f64, stream: &mut RandomStream) -> Result<u64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid(
            "lambda",
            format!("Poisson rate must be finite and non-negative, got {lambda}"),
        ));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    if lambda <= INVERSION_MAX_LAMBDA {
        let u = stream.uniform();
        let mut n = 0u64;
        let mut p = (-lambda).exp();
        let mut cdf = p;
        while u > cdf {
            n += 1;
            p *= lambda / n as f64;
            cdf += p;
            // cdf can stall just below 1 from rounding
            if p == 0.0 {
                break;
            }
        }
        Ok(n)
    } else {
        let dist = Poisson::new(lambda)
            .map_err(|e| Error::invalid("lambda", format!("rejected by Poisson sampler: {e}")))?;
        let x: f64 = dist.sample(stream);
        Ok(x as u64)
    }
}

/// One compound Poisson trajectory on `[0, 1]`, held exactly as its jumps.
///
/// `s(t) = Σ_{τ_i ≤ t} a_i` (right-continuous, `s(0) = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundPoissonPath {
    lambda: f64,
    law: JumpLaw,
    times: Vec<Dyadic>,
    heights: Vec<f64>,
    // levels[i] = value of s after the i-th jump
    levels: Vec<f64>,
}

impl CompoundPoissonPath {
    pub fn from_dyadic(
        lambda: f64,
        law: JumpLaw,
        times: Vec<Dyadic>,
        heights: Vec<f64>,
    ) -> Result<Self> {
        check_positive("lambda", lambda)?;
        if times.len() != heights.len() {
            return Err(Error::invalid(
                "jump_heights",
                format!("{} times but {} heights", times.len(), heights.len()),
            ));
        }
        if times.first().is_some_and(|t| t.is_zero()) {
            return Err(Error::invalid("jump_times", "jump at t = 0"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("jump_times", "must be strictly increasing"));
        }
        if heights.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("jump_heights", "must be finite"));
        }
        let mut levels = Vec::with_capacity(heights.len() + 1);
        let mut acc = 0.0;
        levels.push(acc);
        for &a in &heights {
            acc += a;
            levels.push(acc);
        }
        Ok(Self {
            lambda,
            law,
            times,
            heights,
            levels,
        })
    }

    /// Builds a path from jump times in `(0, 1)` given as `f64`.
    pub fn from_jumps(lambda: f64, law: JumpLaw, times: &[f64], heights: &[f64]) -> Result<Self> {
        let times = times
            .iter()
            .map(|&t| {
                if t > 0.0 && t < 1.0 {
                    Ok(Dyadic::from_f64(t).expect("checked range"))
                } else {
                    Err(Error::Domain {
                        what: "jump time",
                        value: t,
                        domain: "(0, 1)",
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_dyadic(lambda, law, times, heights.to_vec())
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn law(&self) -> JumpLaw {
        self.law
    }

    /// `σ_0² = λ · Var(a)`.
    pub fn sigma0_sq(&self) -> f64 {
        self.lambda * self.law.variance()
    }

    pub fn num_jumps(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[Dyadic] {
        &self.times
    }

    pub fn jump_times(&self) -> Vec<f64> {
        self.times.iter().map(Dyadic::to_f64).collect()
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// `s` on `[x_i, x_{i+1})`, with `level(0) = 0`.
    pub fn level(&self, i: usize) -> f64 {
        self.levels[i]
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "[0, 1]",
            });
        }
        let count = if t == 1.0 {
            self.times.len()
        } else {
            let d = Dyadic::from_f64(t).expect("checked range");
            self.times.partition_point(|tau| *tau <= d)
        };
        Ok(self.levels[count])
    }

    /// Minimum gap between consecutive jumps, counting 0 as a virtual first
    /// jump; 1 when there are no jumps.
    pub fn min_spacing(&self) -> f64 {
        let mut prev = Dyadic::ZERO;
        let mut best: Option<Dyadic> = None;
        for tau in &self.times {
            let gap = tau.sub(&prev);
            if best.is_none_or(|b| gap < b) {
                best = Some(gap);
            }
            prev = *tau;
        }
        best.map_or(1.0, |d| d.to_f64())
    }

    /// Exact `∫_0^1 s(t)² dt`.
    pub fn l2_norm_sq(&self) -> f64 {
        let n = self.times.len();
        let mut total = 0.0;
        for i in 0..n {
            let len = match self.times.get(i + 1) {
                Some(next) => next.sub(&self.times[i]).to_f64(),
                None => self.times[i].complement().expect("jump > 0").to_f64(),
            };
            let v = self.levels[i + 1];
            total += v * v * len;
        }
        total
    }

    pub fn sample_grid(&self, grid_log2: u32) -> Result<SampledPath> {
        check_grid(grid_log2)?;
        let n = 1usize << grid_log2;
        let mut values = Vec::with_capacity(n);
        let mut p = 0;
        for i in 0..n {
            let t = Dyadic::from_index(grid_log2, i as u64);
            while p < self.times.len() && self.times[p] <= t {
                p += 1;
            }
            values.push(self.levels[p]);
        }
        SampledPath::new(values, ProcessKind::Cp)
    }
}

/// Draws a compound Poisson path: `N ~ Poisson(λ)`, sorted uniform jump
/// times, i.i.d. heights.
pub fn sample_path(
    lambda: f64,
    law: JumpLaw,
    stream: &mut RandomStream,
) -> Result<CompoundPoissonPath> {
    check_positive("lambda", lambda)?;
    let n = poisson_count(lambda, stream)? as usize;
    let mut times: Vec<Dyadic> = (0..n).map(|_| Dyadic::random(stream)).collect();
    loop {
        times.sort_unstable();
        let mut clean = true;
        for i in 0..times.len() {
            let collides = times[i].is_zero() || (i > 0 && times[i] == times[i - 1]);
            if collides {
                times[i] = Dyadic::random(stream);
                clean = false;
            }
        }
        if clean {
            break;
        }
    }
    let heights = (0..n).map(|_| law.sample(stream)).collect();
    CompoundPoissonPath::from_dyadic(lambda, law, times, heights)
}

/// Equispaced samples `s(i / 2^L)`, `i = 0 .. 2^L - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    values: Vec<f64>,
    grid_log2: u32,
    origin: ProcessKind,
}

impl SampledPath {
    pub fn new(values: Vec<f64>, origin: ProcessKind) -> Result<Self> {
        let n = values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::invalid(
                "samples",
                format!("length must be a power of two ≥ 2, got {n}"),
            ));
        }
        Ok(Self {
            grid_log2: n.trailing_zeros(),
            values,
            origin,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid_log2(&self) -> u32 {
        self.grid_log2
    }

    pub fn origin(&self) -> ProcessKind {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Riemann estimate `2^{-L} Σ v_i²` of `∫ s²`.
    pub fn grid_energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }
}

fn check_grid(grid_log2: u32) -> Result<()> {
    if (1..=MAX_GRID_LOG2).contains(&grid_log2) {
        Ok(())
    } else {
        Err(Error::invalid(
            "grid_log2",
            format!("must be in 1..={MAX_GRID_LOG2}, got {grid_log2}"),
        ))
    }
}

/// Brownian motion with `Var s(1) = sigma0_sq` sampled on `i / 2^L`.
pub fn brownian_grid(
    sigma0_sq: f64,
    grid_log2: u32,
    stream: &mut RandomStream,
) -> Result<SampledPath> {
    check_positive("sigma0_sq", sigma0_sq)?;
    check_grid(grid_log2)?;
    let n = 1usize << grid_log2;
    let sd = (sigma0_sq / n as f64).sqrt();
    let mut values = Vec::with_capacity(n);
    let mut acc = 0.0;
    values.push(acc);
    for _ in 1..n {
        let z: f64 = stream.sample(StandardNormal);
        acc += sd * z;
        values.push(acc);
    }
    SampledPath::new(values, ProcessKind::Bm)
}
