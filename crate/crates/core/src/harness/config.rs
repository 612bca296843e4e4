use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_sim::{JumpLaw, ProcessKind, MAX_GRID_LOG2};
use crate::schemes::{Scheme, MAX_LINEAR_TERMS};

/// Where coefficients come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dictionary {
    /// Exact continuum Haar coefficients of the jump representation.
    #[serde(rename = "haar")]
    HaarAnalytic,
    /// Discrete Haar transform of the `2^L`-point grid.
    #[serde(rename = "haar-discrete")]
    HaarDiscrete,
    /// Orthonormal DCT-II of the `2^L`-point grid.
    #[serde(rename = "dct")]
    Dct,
}

impl Dictionary {
    pub fn as_str(&self) -> &'static str {
        match self {
            Dictionary::HaarAnalytic => "haar",
            Dictionary::HaarDiscrete => "haar-discrete",
            Dictionary::Dct => "dct",
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Dictionary::HaarAnalytic)
    }
}

impl fmt::Display for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dictionary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" | "haar_analytic" => Ok(Dictionary::HaarAnalytic),
            "haar-discrete" | "haar_discrete" => Ok(Dictionary::HaarDiscrete),
            "dct" => Ok(Dictionary::Dct),
            other => Err(Error::invalid(
                "dictionary",
                format!("unknown dictionary `{other}` (expected haar, haar-discrete or dct)"),
            )),
        }
    }
}

/// One Monte Carlo MSE experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub process: ProcessKind,
    /// Jump rate; compound Poisson only.
    pub lambda: Option<f64>,
    /// `Var s(1)`.
    pub sigma0_sq: f64,
    /// Defaults to Gaussian jumps of variance `sigma0_sq / lambda`.
    pub jump_law: Option<JumpLaw>,
    pub schemes: Vec<Scheme>,
    pub dictionary: Dictionary,
    pub m_values: Vec<usize>,
    pub grid_log2: u32,
    pub trials: usize,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Compound Poisson with normalized Gaussian jumps, analytic Haar
    /// coefficients, 1000 trials and seed 0.
    pub fn compound_poisson(lambda: f64, schemes: Vec<Scheme>, m_values: Vec<usize>) -> Self {
        Self {
            process: ProcessKind::Cp,
            lambda: Some(lambda),
            sigma0_sq: 1.0,
            jump_law: None,
            schemes,
            dictionary: Dictionary::HaarAnalytic,
            m_values,
            grid_log2: 10,
            trials: 1000,
            master_seed: 0,
            output_path: None,
        }
    }

    /// Brownian motion on the `2^10` grid with discrete Haar coefficients.
    pub fn brownian(schemes: Vec<Scheme>, m_values: Vec<usize>) -> Self {
        Self {
            process: ProcessKind::Bm,
            lambda: None,
            dictionary: Dictionary::HaarDiscrete,
            ..Self::compound_poisson(1.0, schemes, m_values)
        }
    }

    /// Jump law used for compound Poisson trials.
    pub fn law(&self) -> Result<JumpLaw> {
        match (self.jump_law, self.lambda) {
            (Some(law), _) => Ok(law),
            (None, Some(lambda)) => JumpLaw::normalized(self.sigma0_sq, lambda),
            (None, None) => Err(Error::invalid(
                "lambda",
                "compound Poisson runs need --lambda",
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0_sq.is_finite() && self.sigma0_sq > 0.0) {
            return Err(Error::invalid("sigma0_sq", "must be positive and finite"));
        }
        match self.process {
            ProcessKind::Cp => {
                let lambda = self.lambda.ok_or_else(|| {
                    Error::invalid("lambda", "compound Poisson runs need --lambda")
                })?;
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::invalid(
                        "lambda",
                        format!("must be positive, got {lambda}"),
                    ));
                }
                self.law()?;
            }
            ProcessKind::Bm => {
                if self.lambda.is_some() || self.jump_law.is_some() {
                    return Err(Error::invalid(
                        "lambda",
                        "Brownian motion has no jump rate or jump law; drop --lambda",
                    ));
                }
                if self.dictionary == Dictionary::HaarAnalytic {
                    return Err(Error::invalid(
                        "dictionary",
                        "Brownian motion is sampled on a grid; use haar-discrete or dct",
                    ));
                }
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid(
                "schemes",
                "give at least one of linear, greedy, best",
            ));
        }
        let mut seen = HashSet::new();
        if !self.schemes.iter().all(|s| seen.insert(*s)) {
            return Err(Error::invalid("schemes", "each scheme may appear once"));
        }
        if self.dictionary == Dictionary::Dct && self.schemes.iter().any(|s| *s != Scheme::Best) {
            return Err(Error::invalid(
                "schemes",
                "the dct dictionary supports only best",
            ));
        }
        if self.m_values.is_empty() {
            return Err(Error::invalid("m_values", "give at least one M"));
        }
        if self.m_values[0] == 0 {
            return Err(Error::invalid("m_values", "M must be ≥ 1"));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("m_values", "must be strictly increasing"));
        }
        let m_max = *self.m_values.last().expect("nonempty");
        if self.dictionary.is_discrete() {
            if !(1..=MAX_GRID_LOG2).contains(&self.grid_log2) {
                return Err(Error::invalid(
                    "grid_log2",
                    format!("must be in 1..={MAX_GRID_LOG2}, got {}", self.grid_log2),
                ));
            }
            if m_max > 1 << self.grid_log2 {
                return Err(Error::invalid(
                    "m_values",
                    format!(
                        "M = {m_max} exceeds the 2^{} grid coefficients",
                        self.grid_log2
                    ),
                ));
            }
        } else if self.schemes.contains(&Scheme::Linear) && m_max > MAX_LINEAR_TERMS {
            return Err(Error::invalid(
                "m_values",
                format!("linear selection supports M ≤ {MAX_LINEAR_TERMS}"),
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be ≥ 1"));
        }
        Ok(())
    }
}
