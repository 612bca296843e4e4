//! Closed-form quantities against independent references.
//!
//! The `E[2^{-M/N}]` table comes from `oracles/two_pow_reference.py`
//! (mpmath, 40 digits, tail mass below 1e-60).

#![allow(clippy::excessive_precision)]

use cphaar::levy_sim::poisson_count;
use cphaar::theory::{
    expected_two_pow, jm_bounds, linear_mse, spacing_survival, subexp_probe, superpoly_probe,
    tail_linear_variance, DEFAULT_TOL,
};
use cphaar::RandomStream;

const REFERENCE: &[(f64, u64, f64)] = &[
    (1.0, 0, 1.0),
    (1.0, 1, 0.378_758_149_090_879_799_8),
    (1.0, 16, 0.003_634_561_839_339_129_363_1),
    (1.0, 256, 8.967_495_701_343_850_015_9e-15),
    (1.0, 1024, 3.732_166_188_608_282_767_3e-33),
    (10.0, 0, 1.0),
    (10.0, 1, 0.925_146_103_491_656_178_44),
    (10.0, 16, 0.315_576_891_621_096_042_2),
    (10.0, 256, 2.704_814_231_204_614_767_3e-6),
    (10.0, 1024, 1.205_817_339_236_827_826_9e-16),
    (50.0, 0, 1.0),
    (50.0, 1, 0.985_949_801_996_894_959_48),
    (50.0, 16, 0.797_815_088_204_592_276_59),
    (50.0, 256, 0.030_303_728_999_408_305_297),
    (50.0, 1024, 2.423_904_192_798_601_071_3e-6),
    (100.0, 0, 1.0),
    (100.0, 1, 0.993_022_495_932_168_271_97),
    (100.0, 16, 0.894_070_919_870_050_668_07),
    (100.0, 256, 0.169_257_496_107_124_454_64),
    (100.0, 1024, 0.000_976_727_012_697_285_196_85),
    (500.0, 0, 1.0),
    (500.0, 1, 0.998_611_888_157_588_362_65),
    (500.0, 16, 0.978_020_398_504_398_699_14),
    (500.0, 256, 0.700_839_293_295_889_152_62),
    (500.0, 1024, 0.241_620_712_053_569_315_97),
];

#[test]
fn two_pow_matches_high_precision_reference() {
    for &(lambda, m, reference) in REFERENCE {
        let (value, tail) = expected_two_pow(lambda, m, DEFAULT_TOL).unwrap();
        // the series is exact up to `tail`; the rest is double rounding
        let allowed = tail + 1e-13 * reference;
        assert!(
            (value - reference).abs() <= allowed,
            "λ={lambda} M={m}: {value:e} vs {reference:e}"
        );
    }
}

#[test]
fn two_pow_coarse_tolerance_is_certified() {
    for &(lambda, m, reference) in REFERENCE {
        let (value, tail) = expected_two_pow(lambda, m, 1e-6).unwrap();
        assert!(tail <= 1e-6);
        assert!((value - reference).abs() <= tail + 1e-13 * reference);
    }
}

#[test]
fn two_pow_matches_monte_carlo() {
    let mut stream = RandomStream::new(2024, 0);
    let draws = 1_000_000;
    let mut sum = 0.0;
    for _ in 0..draws {
        let n = poisson_count(1.0, &mut stream).unwrap();
        if n >= 1 {
            sum += 2f64.powf(-1.0 / n as f64);
        }
    }
    let mc = sum / draws as f64;
    let (exact, _) = expected_two_pow(1.0, 1, DEFAULT_TOL).unwrap();
    assert!((mc - exact).abs() < 1e-3, "{mc} vs {exact}");
}

#[test]
fn probes_have_the_expected_trends() {
    let p2 = superpoly_probe(10.0, 2, &[64, 128, 256, 512]).unwrap();
    let expect = [71.529, 11.052, 0.17726, 7.798e-5];
    for (v, e) in p2.iter().zip(expect) {
        assert!((v - e).abs() <= 1e-3 * e, "{v} vs {e}");
    }
    assert!(p2.windows(2).all(|w| w[1] < w[0]));

    let pe = subexp_probe(10.0, 0.1, &[512, 1024, 2048]).unwrap();
    let expect = [5.12e12, 3.57e28, 7.82e62];
    for (v, e) in pe.iter().zip(expect) {
        assert!((v - e).abs() <= 1e-2 * e, "{v} vs {e}");
    }
    assert!(pe.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn jm_bounds_ordered_exhaustively() {
    for m in 2..=256u64 {
        for n in 1..=64u64 {
            for step in 1..=20 {
                let delta = step as f64 / 20.0 / n as f64;
                let (lo, hi) = jm_bounds(m, n, delta).unwrap();
                assert!(lo <= hi, "M={m} N={n} Δ={delta}");
            }
        }
    }
}

#[test]
fn survival_monotone_in_delta() {
    for n in [1u64, 2, 5, 17] {
        let max = 1.0 / n as f64;
        let vals: Vec<f64> = (0..=100)
            .map(|i| {
                spacing_survival(
                    n,
                    if i == 100 {
                        max
                    } else {
                        max * i as f64 / 100.0
                    },
                    1.0,
                )
                .unwrap()
            })
            .collect();
        assert_eq!(vals[0], 1.0);
        assert_eq!(*vals.last().unwrap(), 0.0);
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn linear_mse_matches_tail_sum() {
    // σ²/(6M) at dyadic M equals the geometric tail from scale log₂M
    for j in 0..30u32 {
        let m = 1u64 << (j + 1);
        let a = linear_mse(m, 2.5).unwrap();
        let b = tail_linear_variance(j, 2.5);
        assert!((a - b).abs() <= 1e-15 * b);
        assert!((a - 2.5 / (6.0 * m as f64)).abs() <= 1e-15 * a);
    }
}
