//! Fixed-point binary fractions in `[0, 1)` with 512 bits of resolution.
//!
//! Jump locations of compound Poisson paths are kept in this form so that the
//! dyadic cell containing a jump, and its relative position inside that cell,
//! stay exact far below `f64` resolution. Greedy approximation of a path with
//! a single jump reaches scale `M - 2`, so scales of several hundred occur in
//! ordinary runs.

use std::cmp::Ordering;

use crate::rng::RandomStream;

const WORDS: usize = 8;

/// Total number of fractional bits.
pub const DYADIC_BITS: u32 = (WORDS as u32) * 64;

/// Finest Haar scale whose in-cell position still carries a full `f64`
/// mantissa.
pub const MAX_SCALE: u32 = DYADIC_BITS - 64;

/// Value `Σ words[i] · 2^{-64(i+1)}`; `words[0]` is the most significant.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Dyadic([u64; WORDS]);

/// Exact `2^e` for exponents in the normal `f64` range.
pub(crate) fn pow2(e: i32) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((1023 + e) as u64) << 52)
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic([0; WORDS]);

    pub fn from_words(words: [u64; WORDS]) -> Self {
        Dyadic(words)
    }

    pub fn words(&self) -> &[u64; WORDS] {
        &self.0
    }

    /// Uniform draw on the 2^512-point grid of `[0, 1)`.
    pub fn random(stream: &mut RandomStream) -> Self {
        let mut w = [0u64; WORDS];
        for x in w.iter_mut() {
            *x = stream.next_u64();
        }
        Dyadic(w)
    }

    /// Exact conversion of `x ∈ [0, 1)`; bits below 2^-512 are dropped.
    pub fn from_f64(x: f64) -> Option<Self> {
        if !(0.0..1.0).contains(&x) {
            return None;
        }
        let mut w = [0u64; WORDS];
        let mut frac = x;
        for word in w.iter_mut() {
            if frac == 0.0 {
                break;
            }
            frac *= pow2(64);
            let whole = frac.floor();
            *word = whole as u64;
            frac -= whole;
        }
        Some(Dyadic(w))
    }

    /// `k · 2^{-scale}` for `scale ≤ 64`, `k < 2^scale`.
    pub fn from_index(scale: u32, k: u64) -> Self {
        assert!(scale <= 64, "from_index supports scales up to 64");
        assert!(
            scale == 64 || k < (1u64 << scale),
            "shift {k} out of range at scale {scale}"
        );
        let mut w = [0u64; WORDS];
        if scale > 0 {
            w[0] = if scale == 64 { k } else { k << (64 - scale) };
        }
        Dyadic(w)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    /// Bits `[pos, pos + count)` right-aligned; bit 0 is the 2^-1 digit.
    pub fn bits(&self, pos: u32, count: u32) -> u64 {
        debug_assert!(count <= 64);
        if count == 0 || pos >= DYADIC_BITS {
            return 0;
        }
        let w = (pos / 64) as usize;
        let off = pos % 64;
        let hi = self.0[w] as u128;
        let lo = if w + 1 < WORDS {
            self.0[w + 1] as u128
        } else {
            0
        };
        let window = (hi << 64) | lo;
        ((window << off) >> (128 - count)) as u64
    }

    fn leading_zeros(&self) -> u32 {
        let mut n = 0;
        for &w in &self.0 {
            if w == 0 {
                n += 64;
            } else {
                return n + w.leading_zeros();
            }
        }
        n
    }

    /// Nearest-below `f64` (truncation of the binary expansion).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let p = self.leading_zeros();
        let mant = self.bits(p, 53);
        // mant < 2^53 and p + 53 ≤ 564, so both factors are exact.
        (mant as f64) * pow2(-((p + 53) as i32))
    }

    /// `frac(2^shift · self)`: drops the leading `shift` bits.
    pub fn shl(&self, shift: u32) -> Self {
        if shift >= DYADIC_BITS {
            return Dyadic::ZERO;
        }
        let ws = (shift / 64) as usize;
        let bs = shift % 64;
        let mut out = [0u64; WORDS];
        for (i, o) in out.iter_mut().enumerate() {
            let src = i + ws;
            if src >= WORDS {
                break;
            }
            let hi = self.0[src];
            let lo = if src + 1 < WORDS { self.0[src + 1] } else { 0 };
            *o = if bs == 0 {
                hi
            } else {
                (hi << bs) | (lo >> (64 - bs))
            };
        }
        Dyadic(out)
    }

    /// Keeps the leading `len` bits: the left endpoint of the scale-`len`
    /// dyadic cell containing `self`.
    pub fn truncate(&self, len: u32) -> Self {
        let mut out = self.0;
        for (i, w) in out.iter_mut().enumerate() {
            let start = (i as u32) * 64;
            if len <= start {
                *w = 0;
            } else if len < start + 64 {
                *w &= !(u64::MAX >> (len - start));
            }
        }
        Dyadic(out)
    }

    /// Position inside the scale-`scale` dyadic cell, in `[0, 1)`.
    pub fn frac_at(&self, scale: u32) -> f64 {
        self.shl(scale).to_f64()
    }

    /// Cell index at `scale ≤ 64`.
    pub fn index_at(&self, scale: u32) -> u64 {
        assert!(scale <= 64);
        self.bits(0, scale)
    }

    /// `self - other`, requiring `self ≥ other`.
    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        debug_assert!(self >= other);
        let mut out = [0u64; WORDS];
        let mut borrow = false;
        for i in (0..WORDS).rev() {
            let (d1, b1) = self.0[i].overflowing_sub(other.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            out[i] = d2;
            borrow = b1 || b2;
        }
        Dyadic(out)
    }

    /// `1 - self` for `self > 0`; `None` for zero (the result would be 1).
    pub fn complement(&self) -> Option<Dyadic> {
        if self.is_zero() {
            return None;
        }
        let mut out = [0u64; WORDS];
        let mut carry = true;
        for i in (0..WORDS).rev() {
            let (s, c) = (!self.0[i]).overflowing_add(carry as u64);
            out[i] = s;
            carry = c;
        }
        Some(Dyadic(out))
    }

    /// `self + 2^{-scale}`, or `None` when the sum reaches 1.
    pub fn add_cell(&self, scale: u32) -> Option<Dyadic> {
        if scale == 0 {
            return None;
        }
        assert!(scale <= DYADIC_BITS);
        let bit = scale - 1;
        let mut out = self.0;
        let mut i = (bit / 64) as usize;
        let mut add = 1u64 << (63 - bit % 64);
        loop {
            let (s, c) = out[i].overflowing_add(add);
            out[i] = s;
            if !c {
                return Some(Dyadic(out));
            }
            if i == 0 {
                return None;
            }
            i -= 1;
            add = 1;
        }
    }

    /// Compares against a real `t ∈ [0, 1]`.
    pub fn cmp_f64(&self, t: f64) -> Ordering {
        if t >= 1.0 {
            return Ordering::Less;
        }
        match Dyadic::from_f64(t.max(0.0)) {
            Some(d) => self.cmp(&d),
            None => Ordering::Greater,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f64_roundtrip_exact() {
        for &x in &[0.0, 0.25, 0.3, 0.5, 0.75, 3e-60, 0.999_999_999_999] {
            let d = Dyadic::from_f64(x).unwrap();
            assert_eq!(d.to_f64(), x);
        }
        assert!(Dyadic::from_f64(1.0).is_none());
        assert!(Dyadic::from_f64(-0.1).is_none());
    }

    #[test]
    fn index_and_fraction() {
        let d = Dyadic::from_f64(0.3).unwrap();
        assert_eq!(d.index_at(1), 0);
        assert_eq!(d.index_at(2), 1);
        assert_eq!(d.index_at(4), 4);
        assert!((d.frac_at(2) - 0.2).abs() < 1e-15);
        assert_eq!(Dyadic::from_index(3, 5).to_f64(), 0.625);
    }

    #[test]
    fn deep_scale_position_survives() {
        // A point whose binary digits continue past bit 300.
        let mut w = [0u64; 8];
        w[0] = 1 << 62;
        w[5] = 0xdead_beef_0000_0000;
        let d = Dyadic::from_words(w);
        assert_eq!(d.to_f64(), 0.25);
        assert!(d.frac_at(320) > 0.0);
        assert_eq!(d.truncate(1).to_f64(), 0.0);
        assert_eq!(d.truncate(2).to_f64(), 0.25);
    }

    #[test]
    fn add_cell_and_complement() {
        let d = Dyadic::from_index(2, 1);
        assert_eq!(d.add_cell(2).unwrap().to_f64(), 0.5);
        assert!(Dyadic::from_index(2, 3).add_cell(2).is_none());
        assert!(Dyadic::ZERO.add_cell(0).is_none());
        assert_eq!(
            Dyadic::from_f64(0.25)
                .unwrap()
                .complement()
                .unwrap()
                .to_f64(),
            0.75
        );
        assert!(Dyadic::ZERO.complement().is_none());
    }

    proptest! {
        #[test]
        fn ordering_matches_f64(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let da = Dyadic::from_f64(a).unwrap();
            let db = Dyadic::from_f64(b).unwrap();
            prop_assert_eq!(da.cmp(&db), a.partial_cmp(&b).unwrap());
        }

        #[test]
        fn sub_matches_f64(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            let d = Dyadic::from_f64(hi).unwrap().sub(&Dyadic::from_f64(lo).unwrap());
            prop_assert!((d.to_f64() - (hi - lo)).abs() <= 2.5e-16);
        }

        #[test]
        fn truncate_plus_fraction_reconstructs(words in proptest::array::uniform8(any::<u64>()), scale in 0u32..40) {
            let d = Dyadic::from_words(words);
            let left = d.truncate(scale).to_f64();
            let u = d.frac_at(scale);
            let recon = left + u * pow2(-(scale as i32));
            prop_assert!((recon - d.to_f64()).abs() <= 4.0 * f64::EPSILON);
            prop_assert!((0.0..1.0).contains(&u));
        }
    }
}
