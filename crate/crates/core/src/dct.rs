//! Orthonormal DCT-II on sampled paths.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::levy_sim::{ProcessKind, SampledPath};

fn check_len(n: usize) -> Result<()> {
    if n >= 1 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::invalid(
            "samples",
            format!("DCT length must be a power of two, got {n}"),
        ))
    }
}

fn norm(k: usize, n: usize) -> f64 {
    if k == 0 {
        (1.0 / n as f64).sqrt()
    } else {
        (2.0 / n as f64).sqrt()
    }
}

/// Definitional `O(n²)` orthonormal DCT-II:
/// `X_k = c_k Σ_m x_m cos(π k (2m + 1) / 2n)`.
pub fn dct2_naive(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    check_len(n)?;
    Ok((0..n)
        .map(|k| {
            let s: f64 = x
                .iter()
                .enumerate()
                .map(|(m, &v)| v * (PI * (k * (2 * m + 1)) as f64 / (2 * n) as f64).cos())
                .sum();
            norm(k, n) * s
        })
        .collect())
}

/// FFT-based DCT-II / DCT-III pair of one length (even/odd reordering
/// followed by a complex FFT of the same length).
#[derive(Clone)]
pub struct Dct2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // e^{-iπk/2n}
    twiddles: Vec<Complex64>,
}

impl std::fmt::Debug for Dct2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Dct2").field("n", &self.n).finish()
    }
}

impl Dct2 {
    pub fn new(n: usize) -> Result<Self> {
        check_len(n)?;
        let mut planner = FftPlanner::new();
        let twiddles = (0..n)
            .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
            .collect();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twiddles,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn check(&self, got: usize) -> Result<()> {
        if got == self.n {
            Ok(())
        } else {
            Err(Error::invalid(
                "samples",
                format!("plan is for length {}, got {got}", self.n),
            ))
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x.len())?;
        let n = self.n;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n / 2 {
            v[k].re = x[2 * k];
            v[n - 1 - k].re = x[2 * k + 1];
        }
        if n == 1 {
            v[0].re = x[0];
        }
        self.forward.process(&mut v);
        Ok((0..n)
            .map(|k| norm(k, n) * (self.twiddles[k] * v[k]).re)
            .collect())
    }

    pub fn inverse(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check(c.len())?;
        let n = self.n;
        let y = |k: usize| if k == n { 0.0 } else { c[k] / norm(k, n) };
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| self.twiddles[k].conj() * Complex64::new(y(k), -y(n - k)))
            .collect();
        self.inverse.process(&mut v);
        let scale = 1.0 / n as f64;
        let mut x = vec![0.0; n];
        for k in 0..n / 2 {
            x[2 * k] = v[k].re * scale;
            x[2 * k + 1] = v[n - 1 - k].re * scale;
        }
        if n == 1 {
            x[0] = v[0].re;
        }
        Ok(x)
    }
}

/// DCT-II coefficients of a sampled path.
#[derive(Debug, Clone, PartialEq)]
pub struct DctCoeffs {
    pub values: Vec<f64>,
    pub grid_log2: u32,
    pub origin: ProcessKind,
}

impl DctCoeffs {
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|c| c * c).sum()
    }

    /// Squared error of keeping the `M` largest coefficients, divided by
    /// `2^L` to match the continuum norm.
    pub fn best_m_error(&self, m: usize) -> Result<f64> {
        best_m_error_scaled(&self.values, m)
    }
}

/// `Σ` of the `len - M` smallest squared entries, divided by the length.
pub(crate) fn best_m_error_scaled(values: &[f64], m: usize) -> Result<f64> {
    let n = values.len();
    if m > n {
        return Err(Error::invalid(
            "M",
            format!("M = {m} exceeds the {n} available coefficients"),
        ));
    }
    let mut sq: Vec<f64> = values.iter().map(|c| c * c).collect();
    sq.sort_by(f64::total_cmp);
    Ok(sq[..n - m].iter().sum::<f64>() / n as f64)
}

pub fn dct2_forward(samples: &SampledPath) -> Result<DctCoeffs> {
    let plan = Dct2::new(samples.len())?;
    Ok(DctCoeffs {
        values: plan.forward(samples.values())?,
        grid_log2: samples.grid_log2(),
        origin: samples.origin(),
    })
}

pub fn dct2_inverse(coeffs: &DctCoeffs) -> Result<SampledPath> {
    let plan = Dct2::new(coeffs.values.len())?;
    SampledPath::new(plan.inverse(&coeffs.values)?, coeffs.origin)
}

pub fn dct_best_m_error(samples: &SampledPath, m: usize) -> Result<f64> {
    dct2_forward(samples)?.best_m_error(m)
}
