//! Haar basis on `[0, 1]`: atom bookkeeping, exact coefficients of compound
//! Poisson paths, and the orthonormal discrete transform for sampled paths.
//!
//! A wavelet coefficient is computed from the jump representation,
//! `⟨s, ψ_{j,k}⟩ = Σ_i a_i ψ̃_{j,k}(τ_i)`, where `ψ̃_{j,k}` is the tent-shaped
//! antiderivative of `-ψ_{j,k}`. Only jumps inside the support contribute, so
//! a coefficient is exactly zero iff its support holds no jump.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use crate::dyadic::{pow2, Dyadic, MAX_SCALE};
use crate::error::{Error, Result};
use crate::levy_sim::CompoundPoissonPath;

/// Scales beyond this are refused by [`expand`], which materializes every atom.
pub const MAX_EXPAND_SCALE: u32 = 30;

/// Haar atom on `[0, 1]`.
///
/// The derived ordering equals the `Ind` ordering: scaling function first,
/// then by scale, then by shift. Shifts are held as the exact dyadic left
/// endpoint of the support so atoms stay representable at any scale.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum AtomId {
    Scaling,
    Wavelet { scale: u32, left: Dyadic },
}

impl AtomId {
    /// `ψ_{j,k}` with `j ≤ 63`, `k < 2^j`.
    pub fn wavelet(scale: u32, shift: u64) -> Result<Self> {
        if scale > 63 {
            return Err(Error::invalid(
                "scale",
                format!("index form supports j ≤ 63, got {scale}"),
            ));
        }
        if shift >= 1u64 << scale {
            return Err(Error::invalid(
                "shift",
                format!("k = {shift} out of range 0..2^{scale}"),
            ));
        }
        Ok(AtomId::Wavelet {
            scale,
            left: Dyadic::from_index(scale, shift),
        })
    }

    /// The scale-`scale` wavelet whose support contains `point`.
    pub fn containing(scale: u32, point: &Dyadic) -> Self {
        AtomId::Wavelet {
            scale,
            left: point.truncate(scale),
        }
    }

    pub fn scale(&self) -> Option<u32> {
        match self {
            AtomId::Scaling => None,
            AtomId::Wavelet { scale, .. } => Some(*scale),
        }
    }

    /// Shift `k`, when it fits in 64 bits.
    pub fn shift(&self) -> Option<u64> {
        match self {
            AtomId::Scaling => None,
            AtomId::Wavelet { scale, left } => (*scale <= 64).then(|| left.index_at(*scale)),
        }
    }

    /// `Ind(φ) = 0`, `Ind(ψ_{j,k}) = 2^j + k`; `None` past scale 62.
    pub fn ind(&self) -> Option<u64> {
        match self {
            AtomId::Scaling => Some(0),
            AtomId::Wavelet { scale, left } => {
                (*scale <= 62).then(|| (1u64 << scale) + left.index_at(*scale))
            }
        }
    }

    pub fn from_ind(ind: u64) -> Self {
        if ind == 0 {
            return AtomId::Scaling;
        }
        let scale = 63 - ind.leading_zeros();
        let shift = ind - (1u64 << scale);
        AtomId::Wavelet {
            scale,
            left: Dyadic::from_index(scale, shift),
        }
    }

    /// Support as `f64` bounds (rounded for very fine scales).
    pub fn support(&self) -> (f64, f64) {
        match self {
            AtomId::Scaling => (0.0, 1.0),
            AtomId::Wavelet { scale, left } => {
                let a = left.to_f64();
                (a, a + pow2(-(*scale as i32)))
            }
        }
    }

    /// Pointwise value of the atom itself (`φ` or `ψ_{j,k}`).
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            AtomId::Scaling => {
                if (0.0..1.0).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
            AtomId::Wavelet { scale, left } => {
                let u = (t - left.to_f64()) * pow2(*scale as i32);
                let amp = pow2_half(*scale as i32);
                if (0.0..0.5).contains(&u) {
                    amp
                } else if (0.5..1.0).contains(&u) {
                    -amp
                } else {
                    0.0
                }
            }
        }
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self, self.shift()) {
            (AtomId::Scaling, _) => write!(f, "phi"),
            (AtomId::Wavelet { scale, .. }, Some(k)) => write!(f, "psi({scale},{k})"),
            (AtomId::Wavelet { scale, left }, None) => {
                write!(f, "psi({scale},~{:e}·2^{scale})", left.to_f64())
            }
        }
    }
}

/// `2^{e/2}`.
pub(crate) fn pow2_half(e: i32) -> f64 {
    if e % 2 == 0 {
        pow2(e / 2)
    } else {
        pow2((e - 1) / 2) * SQRT_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveletCoefficient {
    pub atom: AtomId,
    pub value: f64,
    /// Jumps inside the support (all jumps for the scaling atom).
    pub jump_count: usize,
}

impl WaveletCoefficient {
    /// Structural test; never a floating-point threshold.
    pub fn is_nonzero(&self) -> bool {
        self.jump_count > 0
    }
}

/// `φ̃(t) = 1 - t` on `[0, 1]`.
pub fn phi_tilde(t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(1.0 - t)
}

/// `ψ̃_{j,k}(t)`: `2^{j/2}(k 2^{-j} - t)` on the first half of the support,
/// `2^{j/2}(t - (k+1) 2^{-j})` on the second, zero elsewhere.
pub fn psi_tilde(scale: u32, shift: u64, t: f64) -> Result<f64> {
    check_unit(t)?;
    AtomId::wavelet(scale, shift)?;
    let u = t * pow2(scale as i32) - shift as f64;
    Ok(if (0.0..1.0).contains(&u) {
        tent(u) * pow2_half(-(scale as i32))
    } else {
        0.0
    })
}

// ψ̃ profile on its support, in units of 2^{-j/2}
fn tent(u: f64) -> f64 {
    if u < 0.5 {
        -u
    } else {
        u - 1.0
    }
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "t",
            value: t,
            domain: "[0, 1]",
        })
    }
}

pub(crate) fn check_scale(scale: u32) -> Result<()> {
    if scale > MAX_SCALE {
        Err(Error::ScaleLimit {
            scale,
            limit: MAX_SCALE,
        })
    } else {
        Ok(())
    }
}

/// Index range of jumps inside the support of `atom`.
fn support_range(path: &CompoundPoissonPath, atom: &AtomId) -> std::ops::Range<usize> {
    let times = path.times();
    match atom {
        AtomId::Scaling => 0..times.len(),
        AtomId::Wavelet { scale, left } => {
            let lo = times.partition_point(|t| t < left);
            let hi = match left.add_cell(*scale) {
                Some(right) => times.partition_point(|t| *t < right),
                None => times.len(),
            };
            lo..hi
        }
    }
}

/// `K_{j,k}`: jumps in `[k 2^{-j}, (k+1) 2^{-j})`; `N` for the scaling atom.
pub fn jumps_in_support(path: &CompoundPoissonPath, atom: &AtomId) -> usize {
    support_range(path, atom).len()
}

fn wavelet_value(path: &CompoundPoissonPath, scale: u32, range: std::ops::Range<usize>) -> f64 {
    let times = &path.times()[range.clone()];
    let heights = &path.heights()[range];
    let sum: f64 = times
        .iter()
        .zip(heights)
        .map(|(t, a)| a * tent(t.frac_at(scale)))
        .sum();
    sum * pow2_half(-(scale as i32))
}

fn scaling_value(path: &CompoundPoissonPath) -> f64 {
    path.times()
        .iter()
        .zip(path.heights())
        .map(|(t, a)| a * t.complement().expect("jump > 0").to_f64())
        .sum()
}

/// Exact coefficient `⟨s, atom⟩`.
pub fn coeff(path: &CompoundPoissonPath, atom: &AtomId) -> Result<WaveletCoefficient> {
    let range = support_range(path, atom);
    let jump_count = range.len();
    let value = match atom {
        AtomId::Scaling => scaling_value(path),
        AtomId::Wavelet { scale, .. } => {
            check_scale(*scale)?;
            if jump_count == 0 {
                0.0
            } else {
                wavelet_value(path, *scale, range)
            }
        }
    };
    Ok(WaveletCoefficient {
        atom: *atom,
        value,
        jump_count,
    })
}

/// Scaling coefficient `⟨s, φ⟩`.
pub fn scaling_coeff(path: &CompoundPoissonPath) -> WaveletCoefficient {
    WaveletCoefficient {
        atom: AtomId::Scaling,
        value: scaling_value(path),
        jump_count: path.num_jumps(),
    }
}

/// Nonzero coefficients at one scale, in shift order.
pub fn scale_coefficients(
    path: &CompoundPoissonPath,
    scale: u32,
) -> Result<Vec<WaveletCoefficient>> {
    check_scale(scale)?;
    let times = path.times();
    let mut out = Vec::new();
    let mut start = 0;
    while start < times.len() {
        let left = times[start].truncate(scale);
        let mut end = start + 1;
        while end < times.len() && times[end].truncate(scale) == left {
            end += 1;
        }
        out.push(WaveletCoefficient {
            atom: AtomId::Wavelet { scale, left },
            value: wavelet_value(path, scale, start..end),
            jump_count: end - start,
        });
        start = end;
    }
    Ok(out)
}

/// `‖s - P_{V_level} s‖²`: the energy held by all wavelets of scale
/// `≥ level`, where `V_level` is the span of piecewise constants on cells of
/// width `2^{-level}`.
///
/// Summed cell by cell as the variance of `s` inside each cell that holds a
/// jump, which keeps full relative precision however small the result.
pub fn tail_energy(path: &CompoundPoissonPath, level: u32) -> Result<f64> {
    check_scale(level)?;
    let times = path.times();
    let heights = path.heights();
    let mut total = 0.0;
    let mut start = 0;
    let mut lens = Vec::new();
    let mut vals = Vec::new();
    while start < times.len() {
        let left = times[start].truncate(level);
        let mut end = start + 1;
        while end < times.len() && times[end].truncate(level) == left {
            end += 1;
        }
        // s - s(cell start) on the sub-segments of the cell, widths in cell units
        lens.clear();
        vals.clear();
        lens.push(times[start].shl(level).to_f64());
        vals.push(0.0);
        let mut acc = 0.0;
        for i in start..end {
            acc += heights[i];
            let len = if i + 1 < end {
                times[i + 1].sub(&times[i]).shl(level).to_f64()
            } else {
                times[i].shl(level).complement().map_or(1.0, |c| c.to_f64())
            };
            lens.push(len);
            vals.push(acc);
        }
        let mean: f64 = lens.iter().zip(&vals).map(|(l, v)| l * v).sum();
        let var: f64 = lens
            .iter()
            .zip(&vals)
            .map(|(l, v)| l * (v - mean) * (v - mean))
            .sum();
        total += var * pow2(-(level as i32));
        start = end;
    }
    Ok(total)
}

/// Upper bound `(Σ|a_i|) 2^{-j/2-1}` on every coefficient magnitude at scale `j`.
pub fn coeff_envelope(scale: u32, path: &CompoundPoissonPath) -> f64 {
    let total: f64 = path.heights().iter().map(|a| a.abs()).sum();
    total * pow2_half(-(scale as i32)) * 0.5
}

/// All coefficients up to a maximum scale, zeros held implicitly.
#[derive(Debug, Clone)]
pub struct Expansion {
    max_scale: u32,
    sigma0_sq: f64,
    lambda: f64,
    // nonzero coefficients, Ind-ordered
    nonzero: Vec<WaveletCoefficient>,
}

impl Expansion {
    pub fn max_scale(&self) -> u32 {
        self.max_scale
    }

    pub fn sigma0_sq(&self) -> f64 {
        self.sigma0_sq
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nonzero(&self) -> &[WaveletCoefficient] {
        &self.nonzero
    }

    /// Number of atoms covered: `2^{J+1}`.
    pub fn len(&self) -> usize {
        1usize << (self.max_scale + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, atom: &AtomId) -> Option<WaveletCoefficient> {
        if atom.scale().is_some_and(|j| j > self.max_scale) {
            return None;
        }
        Some(match self.nonzero.binary_search_by(|c| c.atom.cmp(atom)) {
            Ok(i) => self.nonzero[i],
            Err(_) => WaveletCoefficient {
                atom: *atom,
                value: 0.0,
                jump_count: 0,
            },
        })
    }

    /// Every atom with `Ind < 2^{J+1}`, in order, zeros included.
    pub fn dense(&self) -> impl Iterator<Item = WaveletCoefficient> + '_ {
        let mut next = self.nonzero.iter().peekable();
        (0..self.len() as u64).map(move |ind| {
            let atom = AtomId::from_ind(ind);
            match next.peek() {
                Some(c) if c.atom == atom => *next.next().expect("peeked"),
                _ => WaveletCoefficient {
                    atom,
                    value: 0.0,
                    jump_count: 0,
                },
            }
        })
    }

    /// `Σ` of squared coefficients held.
    pub fn energy(&self) -> f64 {
        self.nonzero.iter().map(|c| c.value * c.value).sum()
    }
}

/// Coefficients of all atoms with scale `≤ max_scale`; cost `O(N·J)`.
pub fn expand(path: &CompoundPoissonPath, max_scale: u32) -> Result<Expansion> {
    if max_scale > MAX_EXPAND_SCALE {
        return Err(Error::invalid(
            "max_scale",
            format!("expansions are limited to J ≤ {MAX_EXPAND_SCALE}, got {max_scale}"),
        ));
    }
    let mut nonzero = Vec::new();
    if path.num_jumps() > 0 {
        nonzero.push(scaling_coeff(path));
        for j in 0..=max_scale {
            nonzero.extend(scale_coefficients(path, j)?);
        }
    }
    Ok(Expansion {
        max_scale,
        sigma0_sq: path.sigma0_sq(),
        lambda: path.lambda(),
        nonzero,
    })
}

fn check_pow2_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        Err(Error::invalid(
            "samples",
            format!("length must be a power of two, got {n}"),
        ))
    } else {
        Ok(())
    }
}

/// Orthonormal discrete Haar transform. Output index equals `Ind`:
/// `[scaling, d_{0,0}, d_{1,0}, d_{1,1}, d_{2,0}, ...]`.
///
/// For samples `x_i` of a grid with `2^L` points, the step function
/// `Σ x_i 1_{[i 2^{-L}, (i+1) 2^{-L})}` has continuum coefficients equal to
/// these times `2^{-L/2}`.
pub fn haar_forward(samples: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    check_pow2_len(n)?;
    let mut out = vec![0.0; n];
    let mut approx = samples.to_vec();
    let mut len = n;
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (approx[2 * i], approx[2 * i + 1]);
            out[half + i] = (a - b) * FRAC_1_SQRT_2;
            approx[i] = (a + b) * FRAC_1_SQRT_2;
        }
        len = half;
    }
    out[0] = approx[0];
    Ok(out)
}

pub fn haar_inverse(coeffs: &[f64]) -> Result<Vec<f64>> {
    let n = coeffs.len();
    check_pow2_len(n)?;
    let mut approx = vec![0.0; n];
    approx[0] = coeffs[0];
    let mut scratch = vec![0.0; n];
    let mut half = 1;
    while half < n {
        for i in 0..half {
            let (s, d) = (approx[i], coeffs[half + i]);
            scratch[2 * i] = (s + d) * FRAC_1_SQRT_2;
            scratch[2 * i + 1] = (s - d) * FRAC_1_SQRT_2;
        }
        approx[..2 * half].copy_from_slice(&scratch[..2 * half]);
        half *= 2;
    }
    Ok(approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_sim::JumpLaw;

    fn one_jump(tau: f64, a: f64) -> CompoundPoissonPath {
        CompoundPoissonPath::from_jumps(1.0, JumpLaw::gaussian(1.0).unwrap(), &[tau], &[a]).unwrap()
    }

    #[test]
    fn ind_examples() {
        assert_eq!(AtomId::Scaling.ind(), Some(0));
        assert_eq!(AtomId::wavelet(0, 0).unwrap().ind(), Some(1));
        assert_eq!(AtomId::wavelet(3, 5).unwrap().ind(), Some(13));
        assert!(AtomId::wavelet(2, 4).is_err());
        assert_eq!(AtomId::from_ind(13), AtomId::wavelet(3, 5).unwrap());
        assert!(AtomId::Scaling < AtomId::wavelet(0, 0).unwrap());
        assert!(AtomId::wavelet(1, 1).unwrap() < AtomId::wavelet(2, 0).unwrap());
    }

    #[test]
    fn auxiliary_functions() {
        assert_eq!(phi_tilde(0.25).unwrap(), 0.75);
        assert_eq!(psi_tilde(0, 0, 0.25).unwrap(), -0.25);
        assert_eq!(psi_tilde(0, 0, 0.75).unwrap(), -0.25);
        assert_eq!(psi_tilde(1, 1, 0.25).unwrap(), 0.0);
        assert!(psi_tilde(0, 0, 1.5).is_err());
        assert!(phi_tilde(-0.5).is_err());
        // peak magnitude 2^{-j/2-1} at the support midpoint
        let peak = psi_tilde(4, 3, 3.5 / 16.0).unwrap();
        assert!((peak.abs() - 2f64.powf(-3.0)).abs() < 1e-15);
    }

    #[test]
    fn support_counts() {
        let empty = CompoundPoissonPath::from_jumps(1.0, JumpLaw::gaussian(1.0).unwrap(), &[], &[])
            .unwrap();
        assert_eq!(jumps_in_support(&empty, &AtomId::wavelet(1, 0).unwrap()), 0);
        let p = one_jump(0.3, 1.0);
        assert_eq!(jumps_in_support(&p, &AtomId::wavelet(1, 0).unwrap()), 1);
        assert_eq!(jumps_in_support(&p, &AtomId::wavelet(1, 1).unwrap()), 0);
        assert_eq!(jumps_in_support(&p, &AtomId::Scaling), 1);
        // dyadic boundary belongs to the right cell
        let q = one_jump(0.5, 1.0);
        assert_eq!(jumps_in_support(&q, &AtomId::wavelet(1, 0).unwrap()), 0);
        assert_eq!(jumps_in_support(&q, &AtomId::wavelet(1, 1).unwrap()), 1);
    }

    #[test]
    fn coefficient_examples() {
        let p = one_jump(0.25, 1.0);
        assert_eq!(
            coeff(&p, &AtomId::wavelet(0, 0).unwrap()).unwrap().value,
            -0.25
        );
        assert_eq!(coeff(&p, &AtomId::Scaling).unwrap().value, 0.75);
        let c = coeff(&p, &AtomId::wavelet(1, 1).unwrap()).unwrap();
        assert_eq!(c.value, 0.0);
        assert_eq!(c.jump_count, 0);
    }

    #[test]
    fn envelope_examples() {
        let empty = CompoundPoissonPath::from_jumps(1.0, JumpLaw::gaussian(1.0).unwrap(), &[], &[])
            .unwrap();
        assert_eq!(coeff_envelope(0, &empty), 0.0);
        assert_eq!(coeff_envelope(0, &one_jump(0.4, 2.0)), 1.0);
    }

    #[test]
    fn tail_energy_of_one_jump() {
        let p = one_jump(0.25, 1.0);
        // all wavelet energy: ‖s‖² - ⟨s,φ⟩² = 0.75 - 0.5625
        assert!((tail_energy(&p, 0).unwrap() - 0.1875).abs() < 1e-16);
        // beyond scale 0: subtract ψ_{0,0}² = 0.0625
        assert!((tail_energy(&p, 1).unwrap() - 0.125).abs() < 1e-16);
        assert!(tail_energy(&p, MAX_SCALE + 1).is_err());
    }

    #[test]
    fn discrete_examples() {
        let c = haar_forward(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((c[0] - 2.0).abs() < 1e-15);
        assert!(c[1..].iter().all(|&x| x.abs() < 1e-15));
        let d = haar_forward(&[1.0, -1.0]).unwrap();
        assert!(d[0].abs() < 1e-15);
        assert!((d[1] - SQRT_2).abs() < 1e-15);
        assert!(haar_forward(&[1.0, 2.0, 3.0]).is_err());
        assert!(haar_inverse(&[]).is_err());
    }

    #[test]
    fn expand_zero_path() {
        let empty = CompoundPoissonPath::from_jumps(1.0, JumpLaw::gaussian(1.0).unwrap(), &[], &[])
            .unwrap();
        let e = expand(&empty, 4).unwrap();
        assert_eq!(e.dense().count(), 32);
        assert!(e.dense().all(|c| c.value == 0.0));
        assert!(expand(&empty, 31).is_err());
    }
}
