//! Closed-form quantities: linear MSE, spacing survival, `E[2^{-M/N}]`,
//! the greedy MSE envelope and its asymptotic probes.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest rate accepted by [`theorem1_envelope`]; `e^{2λ}` overflows beyond.
pub const MAX_ENVELOPE_LAMBDA: f64 = 350.0;

/// Default truncation tolerance for [`expected_two_pow`].
pub const DEFAULT_TOL: f64 = 1e-300;

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be a positive finite number, got {x}"),
        ))
    }
}

/// Expected continuum error of linear approximation with `M ≥ 1` terms,
/// for any Lévy process with `Var s(1) = sigma0_sq`.
///
/// `(σ²/12) 2^{-J} (2 - m 2^{-J})` with `J = ⌊log₂ M⌋`, `m = M - 2^J`.
pub fn linear_mse(m: u64, sigma0_sq: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::invalid("M", "linear MSE needs M ≥ 1"));
    }
    check_positive("sigma0_sq", sigma0_sq)?;
    let j = 63 - m.leading_zeros();
    let scale = 2f64.powi(-(j as i32));
    let partial = (m - (1u64 << j)) as f64;
    Ok(sigma0_sq / 12.0 * scale * (2.0 - partial * scale))
}

/// `P(Δ ≥ δ | N = n) = (1 - nδ/ℓ)^n` for `n` uniform points on an interval
/// of length `ℓ`, with the left end as a virtual first point.
pub fn spacing_survival(n: u64, delta: f64, interval_length: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n", "needs at least one point"));
    }
    check_positive("interval_length", interval_length)?;
    let max = interval_length / n as f64;
    if !(0.0..=max).contains(&delta) {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "[0, interval_length / n]",
        });
    }
    let base = (1.0 - n as f64 * delta / interval_length).max(0.0);
    Ok(if n <= i32::MAX as u64 {
        base.powi(n as i32)
    } else {
        base.powf(n as f64)
    })
}

/// `E[2^{-M/N}]` for `N ~ Poisson(λ)`, with the `N = 0` term equal to 0 for
/// `M ≥ 1` and 1 for `M = 0`.
///
/// Returns `(value, tail_bound)`. The series is cut at
/// `n* = ⌈λ(e-1) + ln(1/tol)⌉`, and the exact value lies within
/// `tail_bound = e^{λ(e-1) - n*} ≤ tol` of `value`.
pub fn expected_two_pow(lambda: f64, m: u64, tol: f64) -> Result<(f64, f64)> {
    check_positive("lambda", lambda)?;
    check_positive("tol", tol)?;
    if m == 0 {
        return Ok((1.0, 0.0));
    }
    let chernoff = lambda * (E - 1.0);
    let n_star = (chernoff - tol.ln()).ceil().max(1.0);
    if n_star > 1e8 {
        return Err(Error::invalid(
            "lambda",
            "series too long; λ must be below ~5e7",
        ));
    }
    let n_star = n_star as usize;
    let tail_bound = (chernoff - n_star as f64).exp();

    // Poisson weights relative to the mode, normalized at the end: no
    // factorials, no underflow of e^{-λ}.
    let mode = (lambda.floor() as usize).min(n_star);
    let mut weights = vec![0.0; n_star + 1];
    weights[mode] = 1.0;
    for n in mode + 1..=n_star {
        weights[n] = weights[n - 1] * lambda / n as f64;
    }
    for n in (0..mode).rev() {
        weights[n] = weights[n + 1] * (n + 1) as f64 / lambda;
    }
    let mut total = Neumaier::default();
    let mut hit = Neumaier::default();
    let mf = m as f64;
    for (n, &w) in weights.iter().enumerate() {
        total.add(w);
        if n >= 1 && w > 0.0 {
            hit.add(w * (-(mf / n as f64) * LN_2).exp());
        }
    }
    Ok((hit.value() / total.value(), tail_bound))
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Greedy MSE envelope constants `(C1, C2)` for jump variance `σ²/λ`.
pub fn envelope_constants(lambda: f64, sigma0_sq: f64) -> Result<(f64, f64)> {
    check_positive("lambda", lambda)?;
    check_positive("sigma0_sq", sigma0_sq)?;
    if lambda > MAX_ENVELOPE_LAMBDA {
        return Err(Error::Domain {
            what: "lambda",
            value: lambda,
            domain: "(0, 350] (e^{2λ} overflows; log-space constants are not provided)",
        });
    }
    let g = 1.0 + (2.0 * lambda).exp();
    let c1 = sigma0_sq / (48.0 * E * lambda * g);
    let c2 = 2.0 * sigma0_sq / (3.0 * lambda) * g;
    Ok((c1, c2))
}

/// Theoretical quantities at one `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryPoint {
    #[serde(rename = "M")]
    pub m: u64,
    pub linear_mse: f64,
    pub e2mn: f64,
    pub e2mn_tail_bound: f64,
    pub envelope_lo: f64,
    pub envelope_hi: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

/// `[C1 M^{-1} E[2^{-M/N}], C2 M E[2^{-M/N}]]` together with the linear MSE.
pub fn theorem1_envelope(m: u64, lambda: f64, sigma0_sq: f64) -> Result<TheoryPoint> {
    if m == 0 {
        return Err(Error::invalid("M", "envelope needs M ≥ 1"));
    }
    let (c1, c2) = envelope_constants(lambda, sigma0_sq)?;
    let (e2mn, tail) = expected_two_pow(lambda, m, DEFAULT_TOL)?;
    let mf = m as f64;
    Ok(TheoryPoint {
        m,
        linear_mse: linear_mse(m, sigma0_sq)?,
        e2mn,
        e2mn_tail_bound: tail,
        envelope_lo: c1 / mf * e2mn,
        envelope_hi: c2 * mf * e2mn,
        c1,
        c2,
    })
}

/// Bounds `(⌈(M-2)/N⌉, ⌊(M-1)/N + log₂(1/Δ)⌋)` on the greedy stop scale
/// `J_M` of a path with `N` jumps and minimum spacing `Δ`.
pub fn jm_bounds(m: u64, n: u64, delta: f64) -> Result<(u64, u64)> {
    if m < 2 {
        return Err(Error::invalid("M", "bounds need M ≥ 2"));
    }
    if n == 0 {
        return Err(Error::invalid("N", "bounds need at least one jump"));
    }
    if !(delta > 0.0 && delta <= 1.0 / n as f64) {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "(0, 1/N]",
        });
    }
    let lower = (m - 2).div_ceil(n);
    let upper = ((m - 1) as f64 / n as f64 - delta.log2()).floor() as u64;
    Ok((lower, upper))
}

/// Expected energy at scales `> J` of any unit-rate-normalized Lévy path:
/// `σ² 2^{-(J+1)} / 6`.
pub fn tail_linear_variance(j: u32, sigma0_sq: f64) -> f64 {
    sigma0_sq * 2f64.powi(-(j as i32) - 1) / 6.0
}

/// `M^k E[2^{-M/N}]` for each `M`.
pub fn superpoly_probe(lambda: f64, k: u32, m_values: &[u64]) -> Result<Vec<f64>> {
    m_values
        .iter()
        .map(|&m| {
            let (e, _) = expected_two_pow(lambda, m, DEFAULT_TOL)?;
            Ok((m as f64).powi(k as i32) * e)
        })
        .collect()
}

/// `e^{αM} E[2^{-M/N}]` for each `M`.
pub fn subexp_probe(lambda: f64, alpha: f64, m_values: &[u64]) -> Result<Vec<f64>> {
    check_positive("alpha", alpha)?;
    m_values
        .iter()
        .map(|&m| {
            let (e, _) = expected_two_pow(lambda, m, DEFAULT_TOL)?;
            // combined in log space: e^{αM} alone overflows near M = 7100/α
            Ok(if e == 0.0 {
                0.0
            } else {
                (alpha * m as f64 + e.ln()).exp()
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn linear_examples() {
        assert!(close(linear_mse(8, 1.0).unwrap(), 1.0 / 48.0, 1e-15));
        assert!(close(linear_mse(1, 1.0).unwrap(), 1.0 / 6.0, 1e-15));
        assert!(close(linear_mse(3, 1.0).unwrap(), 0.0625, 1e-15));
        assert!(linear_mse(0, 1.0).is_err());
        for j in 1..20u32 {
            let at = linear_mse(1 << j, 1.0).unwrap();
            let below = linear_mse((1 << j) - 1, 1.0).unwrap();
            let limit = 1.0 / 12.0 * 2f64.powi(-(j as i32 - 1)) * 1.0;
            assert!(close(at, limit, 1e-15));
            assert!(below > at);
            assert!(close(at, tail_linear_variance(j - 1, 1.0), 1e-15));
        }
    }

    #[test]
    fn survival_examples() {
        assert_eq!(spacing_survival(1, 0.5, 1.0).unwrap(), 0.5);
        assert_eq!(spacing_survival(2, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(spacing_survival(7, 0.0, 1.0).unwrap(), 1.0);
        assert!(spacing_survival(2, 0.6, 1.0).is_err());
        assert!(spacing_survival(2, -0.1, 1.0).is_err());
    }

    #[test]
    fn two_pow_small_cases() {
        assert_eq!(expected_two_pow(3.0, 0, 1e-12).unwrap().0, 1.0);
        let (v, tail) = expected_two_pow(1.0, 1, DEFAULT_TOL).unwrap();
        assert!(close(v, 0.378_758_149_090_879_8, 1e-14));
        assert!(tail <= DEFAULT_TOL);
        assert!(expected_two_pow(1.0, 1, 0.0).is_err());
    }

    #[test]
    fn envelope_constants_examples() {
        let (c1, c2) = envelope_constants(1.0, 1.0).unwrap();
        assert!(close(c2, 5.592_701, 1e-6));
        assert!(close(c1, 9.136e-4, 1e-3));
        assert!(envelope_constants(351.0, 1.0).is_err());
        let p = theorem1_envelope(1, 10.0, 1.0).unwrap();
        assert!(p.envelope_lo <= p.envelope_hi);
    }

    #[test]
    fn jm_bound_examples() {
        assert_eq!(jm_bounds(10, 2, 0.1).unwrap(), (4, 7));
        assert_eq!(jm_bounds(2, 1, 1.0).unwrap(), (0, 1));
        assert!(jm_bounds(10, 2, 0.6).is_err());
        assert!(jm_bounds(1, 2, 0.1).is_err());
    }

    #[test]
    fn tail_variance_halves() {
        assert!(close(tail_linear_variance(0, 1.0), 1.0 / 12.0, 1e-15));
        for j in 0..50 {
            assert_eq!(
                tail_linear_variance(j + 1, 1.0) * 2.0,
                tail_linear_variance(j, 1.0)
            );
        }
    }

    #[test]
    fn probe_with_k_zero_is_plain_expectation() {
        let ms = [16, 32, 64];
        let p = superpoly_probe(10.0, 0, &ms).unwrap();
        for (m, v) in ms.iter().zip(&p) {
            assert_eq!(*v, expected_two_pow(10.0, *m, DEFAULT_TOL).unwrap().0);
        }
        assert!(p.windows(2).all(|w| w[1] < w[0]));
    }
}
