use crate::theory::Neumaier;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (0 for a single value).
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Compensated mean, two-pass sample variance and normal-approximation CI.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            mean: f64::NAN,
            sd: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
        };
    }
    let mut acc = Neumaier::default();
    values.iter().for_each(|&v| acc.add(v));
    let mean = acc.value() / n as f64;
    let sd = if n > 1 {
        let mut sq = Neumaier::default();
        values.iter().for_each(|&v| sq.add((v - mean) * (v - mean)));
        (sq.value() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let half = Z95 * sd / (n as f64).sqrt();
    Summary {
        mean,
        sd,
        ci_lo: mean - half,
        ci_hi: mean + half,
    }
}
