//! Linear, greedy and best-M-term selections with exact squared errors.
//!
//! Errors are assembled from the coefficients left out at the last scale
//! examined plus the exact residual energy of all finer scales, never by
//! subtracting kept energy from the path energy.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{
    check_scale, coeff_envelope, scale_coefficients, scaling_coeff, tail_energy, AtomId,
    WaveletCoefficient,
};
use crate::levy_sim::CompoundPoissonPath;

/// Largest `M` accepted by [`select_linear`], which lists every kept atom.
pub const MAX_LINEAR_TERMS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Linear,
    Greedy,
    Best,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Linear => "linear",
            Scheme::Greedy => "greedy",
            Scheme::Best => "best",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Scheme::Linear),
            "greedy" => Ok(Scheme::Greedy),
            "best" => Ok(Scheme::Best),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{other}` (expected linear, greedy or best)"),
            )),
        }
    }
}

/// Outcome of one approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub scheme: Scheme,
    pub m: usize,
    /// Kept atoms and their coefficients, Ind-ordered.
    pub kept: Vec<(AtomId, f64)>,
    pub error_sq: f64,
    /// `true` when `error_sq` is the exact continuum error.
    pub certified: bool,
    /// Finest scale examined; for greedy this is `J_M`.
    pub stop_scale: Option<u32>,
}

impl Selection {
    fn empty(scheme: Scheme, m: usize, error_sq: f64, certified: bool) -> Self {
        Self {
            scheme,
            m,
            kept: Vec::new(),
            error_sq,
            certified,
            stop_scale: None,
        }
    }
}

fn sum_sq<'a>(cs: impl IntoIterator<Item = &'a WaveletCoefficient>) -> f64 {
    cs.into_iter().map(|c| c.value * c.value).sum()
}

/// Keeps the atoms with `Ind < M`, zero-valued ones included.
pub fn select_linear(path: &CompoundPoissonPath, m: usize) -> Result<Selection> {
    if m > MAX_LINEAR_TERMS {
        return Err(Error::invalid(
            "M",
            format!("linear selection lists every kept atom; M must be ≤ {MAX_LINEAR_TERMS}"),
        ));
    }
    if m == 0 {
        return Ok(Selection::empty(Scheme::Linear, 0, path.l2_norm_sq(), true));
    }
    let last_scale = usize::BITS - 1 - m.leading_zeros();
    let partial = (m - (1usize << last_scale)) as u64;

    let mut kept = Vec::with_capacity(m);
    kept.push((AtomId::Scaling, scaling_coeff(path).value));
    let mut unkept = 0.0;
    for j in 0..=last_scale {
        let nonzero = scale_coefficients(path, j)?;
        let limit = if j < last_scale { 1u64 << j } else { partial };
        let mut it = nonzero.iter().peekable();
        for k in 0..limit {
            let atom = AtomId::wavelet(j, k)?;
            let value = match it.peek() {
                Some(c) if c.atom == atom => it.next().expect("peeked").value,
                _ => 0.0,
            };
            kept.push((atom, value));
        }
        unkept += sum_sq(it);
    }
    let error_sq = unkept + tail_energy(path, last_scale + 1)?;
    Ok(Selection {
        scheme: Scheme::Linear,
        m,
        kept,
        error_sq,
        certified: true,
        stop_scale: Some(last_scale),
    })
}

/// Keeps the first `M` nonzero atoms in Ind order.
///
/// For `N ≥ 1` every scale holds at least one nonzero coefficient, so the
/// scan ends at scale `J_M`. The zero path returns an empty selection.
pub fn select_greedy(path: &CompoundPoissonPath, m: usize) -> Result<Selection> {
    if path.num_jumps() == 0 {
        return Ok(Selection::empty(Scheme::Greedy, m, 0.0, true));
    }
    if m == 0 {
        return Ok(Selection::empty(Scheme::Greedy, 0, path.l2_norm_sq(), true));
    }
    let mut kept: Vec<(AtomId, f64)> = Vec::with_capacity(m);
    let mut scale = 0;
    loop {
        let mut group = Vec::new();
        if scale == 0 {
            // φ shares scale 0 with ψ_{0,0} in the nonzero count N_J
            group.push(scaling_coeff(path));
        }
        group.extend(scale_coefficients(path, scale)?);
        let need = m - kept.len();
        if group.len() >= need {
            kept.extend(group[..need].iter().map(|c| (c.atom, c.value)));
            let error_sq = sum_sq(&group[need..]) + tail_energy(path, scale + 1)?;
            return Ok(Selection {
                scheme: Scheme::Greedy,
                m,
                kept,
                error_sq,
                certified: true,
                stop_scale: Some(scale),
            });
        }
        kept.extend(group.iter().map(|c| (c.atom, c.value)));
        scale += 1;
        check_scale(scale + 1)?;
    }
}

// larger magnitude first, then smaller Ind
fn by_magnitude(a: &WaveletCoefficient, b: &WaveletCoefficient) -> Ordering {
    b.value
        .abs()
        .partial_cmp(&a.value.abs())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.atom.cmp(&b.atom))
}

/// Exact best-M-term selection over the full (infinite) coefficient set.
///
/// Scales are collected in order until the envelope bound of the next scale
/// falls strictly below the `M`-th largest magnitude found; no later atom can
/// then enter the selection.
pub fn select_best(path: &CompoundPoissonPath, m: usize) -> Result<Selection> {
    if path.num_jumps() == 0 {
        return Ok(Selection::empty(Scheme::Best, m, 0.0, true));
    }
    if m == 0 {
        return Ok(Selection::empty(Scheme::Best, 0, path.l2_norm_sq(), true));
    }
    let mut found = vec![scaling_coeff(path)];
    let mut scale = 0;
    loop {
        if found.len() >= m {
            found.sort_by(by_magnitude);
            let threshold = found[m - 1].value.abs();
            if coeff_envelope(scale, path) < threshold {
                let error_sq = sum_sq(&found[m..]) + tail_energy(path, scale)?;
                let mut kept: Vec<(AtomId, f64)> =
                    found[..m].iter().map(|c| (c.atom, c.value)).collect();
                kept.sort_by_key(|a| a.0);
                return Ok(Selection {
                    scheme: Scheme::Best,
                    m,
                    kept,
                    error_sq,
                    certified: true,
                    stop_scale: Some(scale),
                });
            }
        }
        found.extend(scale_coefficients(path, scale)?);
        scale += 1;
        check_scale(scale)?;
    }
}

pub fn select(path: &CompoundPoissonPath, scheme: Scheme, m: usize) -> Result<Selection> {
    match scheme {
        Scheme::Linear => select_linear(path, m),
        Scheme::Greedy => select_greedy(path, m),
        Scheme::Best => select_best(path, m),
    }
}

fn check_len(coeffs: &[f64], m: usize) -> Result<()> {
    if m > coeffs.len() {
        Err(Error::invalid(
            "M",
            format!(
                "M = {m} exceeds the {} available coefficients",
                coeffs.len()
            ),
        ))
    } else {
        Ok(())
    }
}

fn discrete_selection(coeffs: &[f64], scheme: Scheme, m: usize, keep: &[bool]) -> Selection {
    let kept = keep
        .iter()
        .enumerate()
        .filter(|(_, &k)| k)
        .map(|(i, _)| (AtomId::from_ind(i as u64), coeffs[i]))
        .collect();
    let error_sq = keep
        .iter()
        .zip(coeffs)
        .filter(|(&k, _)| !k)
        .map(|(_, c)| c * c)
        .sum();
    Selection {
        scheme,
        m,
        kept,
        error_sq,
        certified: false,
        stop_scale: None,
    }
}

/// First `M` entries of a finite, Ind-ordered coefficient list.
pub fn select_linear_discrete(coeffs: &[f64], m: usize) -> Result<Selection> {
    check_len(coeffs, m)?;
    let keep: Vec<bool> = (0..coeffs.len()).map(|i| i < m).collect();
    Ok(discrete_selection(coeffs, Scheme::Linear, m, &keep))
}

/// First `M` entries that are exactly nonzero.
pub fn select_greedy_discrete(coeffs: &[f64], m: usize) -> Result<Selection> {
    check_len(coeffs, m)?;
    let mut left = m;
    let keep: Vec<bool> = coeffs
        .iter()
        .map(|&c| {
            if left > 0 && c != 0.0 {
                left -= 1;
                true
            } else {
                false
            }
        })
        .collect();
    Ok(discrete_selection(coeffs, Scheme::Greedy, m, &keep))
}

/// `M` largest magnitudes; ties go to the smaller index.
pub fn select_best_discrete(coeffs: &[f64], m: usize) -> Result<Selection> {
    check_len(coeffs, m)?;
    let mut order: Vec<usize> = (0..coeffs.len()).collect();
    order.sort_by(|&a, &b| {
        coeffs[b]
            .abs()
            .partial_cmp(&coeffs[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut keep = vec![false; coeffs.len()];
    for &i in &order[..m] {
        keep[i] = true;
    }
    Ok(discrete_selection(coeffs, Scheme::Best, m, &keep))
}

pub fn select_discrete(coeffs: &[f64], scheme: Scheme, m: usize) -> Result<Selection> {
    match scheme {
        Scheme::Linear => select_linear_discrete(coeffs, m),
        Scheme::Greedy => select_greedy_discrete(coeffs, m),
        Scheme::Best => select_best_discrete(coeffs, m),
    }
}
