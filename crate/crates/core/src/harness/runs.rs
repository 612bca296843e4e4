use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Dictionary, ExperimentConfig};
use super::stats::summarize;
use crate::dct::{best_m_error_scaled, Dct2};
use crate::error::{Error, Result};
use crate::haar::{haar_forward, pow2_half, scale_coefficients};
use crate::levy_sim::{brownian_grid, sample_path, JumpLaw, ProcessKind, SampledPath};
use crate::rng::RandomStream;
use crate::schemes::{select, select_discrete, Scheme};
use crate::theory::{
    envelope_constants, spacing_survival, theorem1_envelope, Neumaier, TheoryPoint,
};

/// Relative tolerance of the per-trial ordering and monotonicity checks.
/// Errors of different `M` come from different exact decompositions, so
/// they agree only to rounding.
pub const ORDER_SLACK: f64 = 1e-12;

/// Aggregated error of one `(scheme, M)` cell of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRecord {
    pub process: ProcessKind,
    pub scheme: Scheme,
    pub dictionary: Dictionary,
    pub lambda: Option<f64>,
    pub sigma0_sq: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "log2_M")]
    pub log2_m: f64,
    pub mse_mean: f64,
    #[serde(with = "db_repr")]
    pub mse_db: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
    pub seed: u64,
}

// JSON has no -inf; a zero mean is written as the string "-inf".
mod db_repr {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Tok(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::super::format_number(*x))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Tok(t) => match t.as_str() {
                "-inf" => Ok(f64::NEG_INFINITY),
                "inf" => Ok(f64::INFINITY),
                other => Err(serde::de::Error::custom(format!("bad dB token `{other}`"))),
            },
        }
    }
}

fn db(mean: f64) -> f64 {
    if mean == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * mean.log10()
    }
}

/// Per-path context shared by all trials of a run.
struct TrialPlan {
    law: Option<JumpLaw>,
    dct: Option<Dct2>,
}

impl TrialPlan {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let law = match config.process {
            ProcessKind::Cp => Some(config.law()?),
            ProcessKind::Bm => None,
        };
        let dct = match config.dictionary {
            Dictionary::Dct => Some(Dct2::new(1 << config.grid_log2)?),
            _ => None,
        };
        Ok(Self { law, dct })
    }
}

fn grid_for(
    config: &ExperimentConfig,
    plan: &TrialPlan,
    stream: &mut RandomStream,
) -> Result<SampledPath> {
    match config.process {
        ProcessKind::Cp => {
            let path = sample_path(
                config.lambda.expect("validated"),
                plan.law.expect("cp"),
                stream,
            )?;
            path.sample_grid(config.grid_log2)
        }
        ProcessKind::Bm => brownian_grid(config.sigma0_sq, config.grid_log2, stream),
    }
}

fn errors_for(config: &ExperimentConfig, plan: &TrialPlan, trial: u64) -> Result<Vec<f64>> {
    let mut stream = RandomStream::new(config.master_seed, trial);
    let mut out = Vec::with_capacity(config.schemes.len() * config.m_values.len());
    match config.dictionary {
        Dictionary::HaarAnalytic => {
            let path = sample_path(
                config.lambda.expect("validated"),
                plan.law.expect("cp"),
                &mut stream,
            )?;
            for &scheme in &config.schemes {
                for &m in &config.m_values {
                    out.push(select(&path, scheme, m)?.error_sq);
                }
            }
        }
        Dictionary::HaarDiscrete => {
            let grid = grid_for(config, plan, &mut stream)?;
            let coeffs = haar_forward(grid.values())?;
            let n = coeffs.len() as f64;
            for &scheme in &config.schemes {
                for &m in &config.m_values {
                    out.push(select_discrete(&coeffs, scheme, m)?.error_sq / n);
                }
            }
        }
        Dictionary::Dct => {
            let grid = grid_for(config, plan, &mut stream)?;
            let coeffs = plan
                .dct
                .as_ref()
                .expect("dct plan")
                .forward(grid.values())?;
            for &m in &config.m_values {
                out.push(best_m_error_scaled(&coeffs, m)?);
            }
        }
    }
    check_trial(config, trial, &out)?;
    Ok(out)
}

/// Squared errors of one trial, laid out scheme-major: entry
/// `s * m_values.len() + i` belongs to `schemes[s]` at `m_values[i]`.
///
/// Fails with [`Error::Invariant`] when errors rise with `M` or break
/// `best ≤ greedy ≤ linear`.
pub fn trial_errors(config: &ExperimentConfig, trial: u64) -> Result<Vec<f64>> {
    errors_for(config, &TrialPlan::new(config)?, trial)
}

fn exceeds(a: f64, b: f64) -> bool {
    a > b * (1.0 + ORDER_SLACK)
}

fn check_trial(config: &ExperimentConfig, trial: u64, errs: &[f64]) -> Result<()> {
    let nm = config.m_values.len();
    let row = |s: usize| &errs[s * nm..(s + 1) * nm];
    for (s, scheme) in config.schemes.iter().enumerate() {
        for i in 1..nm {
            if exceeds(row(s)[i], row(s)[i - 1]) {
                return Err(Error::Invariant(format!(
                    "trial {trial}: {scheme} error rises from {:e} at M={} to {:e} at M={}",
                    row(s)[i - 1],
                    config.m_values[i - 1],
                    row(s)[i],
                    config.m_values[i]
                )));
            }
        }
    }
    let pos = |x: Scheme| config.schemes.iter().position(|s| *s == x);
    let pairs = [
        (Scheme::Best, Scheme::Greedy),
        (Scheme::Greedy, Scheme::Linear),
        (Scheme::Best, Scheme::Linear),
    ];
    for (lo, hi) in pairs {
        if let (Some(a), Some(b)) = (pos(lo), pos(hi)) {
            for i in 0..nm {
                if exceeds(row(a)[i], row(b)[i]) {
                    return Err(Error::Invariant(format!(
                        "trial {trial}: {lo} error {:e} exceeds {hi} error {:e} at M={}",
                        row(a)[i],
                        row(b)[i],
                        config.m_values[i]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Monte Carlo MSE curve: one record per `(scheme, M)`, schemes outermost.
pub fn run_mse_curve(config: &ExperimentConfig) -> Result<Vec<CurveRecord>> {
    let plan = TrialPlan::new(config)?;
    let per_trial: Vec<Result<Vec<f64>>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| errors_for(config, &plan, t))
        .collect();
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;

    let nm = config.m_values.len();
    let mut records = Vec::with_capacity(config.schemes.len() * nm);
    let mut column = Vec::with_capacity(config.trials);
    for (s, &scheme) in config.schemes.iter().enumerate() {
        for (i, &m) in config.m_values.iter().enumerate() {
            column.clear();
            column.extend(per_trial.iter().map(|e| e[s * nm + i]));
            let sum = summarize(&column);
            records.push(CurveRecord {
                process: config.process,
                scheme,
                dictionary: config.dictionary,
                lambda: config.lambda,
                sigma0_sq: config.sigma0_sq,
                m,
                log2_m: (m as f64).log2(),
                mse_mean: sum.mean,
                mse_db: db(sum.mean),
                ci_lo: sum.ci_lo,
                ci_hi: sum.ci_hi,
                trials: config.trials,
                seed: config.master_seed,
            });
        }
    }
    Ok(records)
}

/// Empirical against exact spacing survival at one `(n, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub n: u64,
    pub delta: f64,
    pub empirical: f64,
    pub theory: f64,
    pub abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lambda: f64,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<LemmaRow>,
    /// Simulated compound Poisson paths with at least one jump.
    pub paths_with_jumps: usize,
    /// Paths among those whose minimum spacing exceeds `1/N`.
    pub spacing_violations: usize,
}

impl LemmaReport {
    pub fn sup_deviation(&self, n: u64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.abs_dev)
            .fold(0.0, f64::max)
    }
}

// Stream indices for the conditional samples live above every trial index.
const LEMMA_DOMAIN: u64 = 1 << 40;

/// Minimum spacing of `n` sorted uniform points, 0 counting as a point.
fn conditional_spacing(n: u64, stream: &mut RandomStream) -> f64 {
    let mut pts: Vec<f64> = (0..n).map(|_| stream.uniform()).collect();
    pts.sort_by(f64::total_cmp);
    let mut prev = 0.0;
    let mut best = f64::INFINITY;
    for p in pts {
        best = best.min(p - prev);
        prev = p;
    }
    best
}

/// For each `n`, `samples` draws of `n` uniform points give the empirical
/// `P(Δ ≥ δ)` on the part of `delta_grid` inside `[0, 1/n]`. Separately,
/// `samples` compound Poisson paths of rate `lambda` are checked for
/// `Δ ≤ 1/N`.
pub fn run_lemma_check(
    lambda: f64,
    n_values: &[u64],
    delta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if samples < 1000 {
        return Err(Error::invalid(
            "samples",
            format!("need at least 1000, got {samples}"),
        ));
    }
    if n_values.contains(&0) {
        return Err(Error::invalid("n", "conditioned counts must be ≥ 1"));
    }
    if delta_grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::invalid(
            "delta",
            "grid values must be finite and ≥ 0",
        ));
    }
    let law = JumpLaw::normalized(1.0, lambda)?;

    let mut rows = Vec::new();
    for (r, &n) in n_values.iter().enumerate() {
        let spacings: Vec<f64> = (0..samples as u64)
            .into_par_iter()
            .map(|s| {
                let mut stream = RandomStream::new(seed, LEMMA_DOMAIN * (r as u64 + 2) + s);
                conditional_spacing(n, &mut stream)
            })
            .collect();
        for &delta in delta_grid.iter().filter(|&&d| d * n as f64 <= 1.0) {
            let hits = spacings.iter().filter(|&&d| d >= delta).count();
            let empirical = hits as f64 / samples as f64;
            let theory = spacing_survival(n, delta, 1.0)?;
            rows.push(LemmaRow {
                n,
                delta,
                empirical,
                theory,
                abs_dev: (empirical - theory).abs(),
            });
        }
    }

    let paths: Vec<Result<(usize, f64)>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut stream = RandomStream::new(seed, LEMMA_DOMAIN + s);
            let p = sample_path(lambda, law, &mut stream)?;
            Ok((p.num_jumps(), p.min_spacing()))
        })
        .collect();
    let mut paths_with_jumps = 0;
    let mut spacing_violations = 0;
    for p in paths {
        let (n, delta) = p?;
        if n > 0 {
            paths_with_jumps += 1;
            if delta * n as f64 > 1.0 {
                spacing_violations += 1;
            }
        }
    }
    Ok(LemmaReport {
        lambda,
        samples,
        seed,
        rows,
        paths_with_jumps,
        spacing_violations,
    })
}

/// Greedy Monte Carlo MSE against the theoretical envelope at one `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Row {
    #[serde(rename = "M")]
    pub m: usize,
    pub mse_mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub envelope_lo: f64,
    pub envelope_hi: f64,
    pub e2mn: f64,
    pub mean_inside: bool,
    pub ci_intersects: bool,
}

pub fn run_theorem1_check(
    lambda: f64,
    sigma0_sq: f64,
    m_values: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<Theorem1Row>> {
    envelope_constants(lambda, sigma0_sq)?;
    let config = ExperimentConfig {
        sigma0_sq,
        trials,
        master_seed: seed,
        ..ExperimentConfig::compound_poisson(lambda, vec![Scheme::Greedy], m_values.to_vec())
    };
    let records = run_mse_curve(&config)?;
    records
        .iter()
        .map(|r| {
            let env = theorem1_envelope(r.m as u64, lambda, sigma0_sq)?;
            Ok(Theorem1Row {
                m: r.m,
                mse_mean: r.mse_mean,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
                envelope_lo: env.envelope_lo,
                envelope_hi: env.envelope_hi,
                e2mn: env.e2mn,
                mean_inside: env.envelope_lo <= r.mse_mean && r.mse_mean <= env.envelope_hi,
                ci_intersects: r.ci_lo <= env.envelope_hi && env.envelope_lo <= r.ci_hi,
            })
        })
        .collect()
}

/// Best-M curves for compound Poisson and Brownian motion, each under the
/// discrete Haar and DCT dictionaries, on one grid with shared seeds.
pub fn run_dict_compare(
    lambda: f64,
    sigma0_sq: f64,
    m_values: &[usize],
    grid_log2: u32,
    trials: usize,
    seed: u64,
) -> Result<Vec<CurveRecord>> {
    let cp = ExperimentConfig {
        sigma0_sq,
        grid_log2,
        trials,
        master_seed: seed,
        ..ExperimentConfig::compound_poisson(lambda, vec![Scheme::Best], m_values.to_vec())
    };
    let bm = ExperimentConfig {
        process: ProcessKind::Bm,
        lambda: None,
        ..cp.clone()
    };
    let mut out = Vec::new();
    for base in [cp, bm] {
        for dictionary in [Dictionary::HaarDiscrete, Dictionary::Dct] {
            out.extend(run_mse_curve(&ExperimentConfig {
                dictionary,
                ..base.clone()
            })?);
        }
    }
    Ok(out)
}

/// Second moment of the wavelet coefficients at one scale, pooled over shifts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub scale: u32,
    pub empirical: f64,
    pub theory: f64,
    pub rel_err: f64,
}

/// `E[⟨s, ψ_{j,k}⟩²]` for `j ≤ max_scale`, estimated over `trials` paths.
///
/// Compound Poisson uses analytic coefficients (`config.lambda`, normalized
/// jumps); Brownian motion uses the discrete transform of the `2^L` grid
/// scaled by `2^{-L/2}`.
pub fn run_coefficient_moments(
    config: &ExperimentConfig,
    max_scale: u32,
) -> Result<Vec<MomentRow>> {
    let plan = TrialPlan::new(&ExperimentConfig {
        dictionary: match config.process {
            ProcessKind::Cp => Dictionary::HaarAnalytic,
            ProcessKind::Bm => Dictionary::HaarDiscrete,
        },
        ..config.clone()
    })?;
    if config.process == ProcessKind::Bm && max_scale >= config.grid_log2 {
        return Err(Error::invalid(
            "max_scale",
            "must be below grid_log2 for sampled paths",
        ));
    }
    let levels = max_scale as usize + 1;
    let per_trial: Vec<Result<Vec<f64>>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut stream = RandomStream::new(config.master_seed, t);
            let mut sums = vec![0.0; levels];
            match config.process {
                ProcessKind::Cp => {
                    let path = sample_path(
                        config.lambda.expect("validated"),
                        plan.law.expect("cp"),
                        &mut stream,
                    )?;
                    for (j, s) in sums.iter_mut().enumerate() {
                        *s = scale_coefficients(&path, j as u32)?
                            .iter()
                            .map(|c| c.value * c.value)
                            .sum();
                    }
                }
                ProcessKind::Bm => {
                    let grid = brownian_grid(config.sigma0_sq, config.grid_log2, &mut stream)?;
                    let coeffs = haar_forward(grid.values())?;
                    let scale = pow2_half(-(config.grid_log2 as i32));
                    for (j, s) in sums.iter_mut().enumerate() {
                        *s = coeffs[1 << j..2 << j]
                            .iter()
                            .map(|c| (c * scale).powi(2))
                            .sum();
                    }
                }
            }
            Ok(sums)
        })
        .collect();
    let per_trial = per_trial.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..levels)
        .map(|j| {
            let mut acc = Neumaier::default();
            per_trial.iter().for_each(|s| acc.add(s[j]));
            let empirical = acc.value() / (config.trials as f64 * (1u64 << j) as f64);
            let theory = config.sigma0_sq * 2f64.powi(-2 * j as i32) / 12.0;
            MomentRow {
                scale: j as u32,
                empirical,
                theory,
                rel_err: (empirical - theory).abs() / theory,
            }
        })
        .collect())
}

pub fn theory_table(lambda: f64, sigma0_sq: f64, m_values: &[u64]) -> Result<Vec<TheoryPoint>> {
    m_values
        .iter()
        .map(|&m| theorem1_envelope(m, lambda, sigma0_sq))
        .collect()
}
