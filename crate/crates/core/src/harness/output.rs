use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::runs::{CurveRecord, LemmaRow, MomentRow, Theorem1Row};
use crate::error::{Error, Result};
use crate::theory::TheoryPoint;

/// 17 significant digits, or the tokens `-inf`, `inf`, `nan`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x < 0.0 { "-inf" } else { "inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// A row type with a fixed CSV layout.
pub trait CsvRecord {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

impl CsvRecord for CurveRecord {
    fn header() -> &'static [&'static str] {
        &[
            "process",
            "scheme",
            "dictionary",
            "lambda",
            "sigma0_sq",
            "M",
            "log2_M",
            "mse_mean",
            "mse_db",
            "ci_lo",
            "ci_hi",
            "trials",
            "seed",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.process.as_str().to_string(),
            self.scheme.as_str().to_string(),
            self.dictionary.as_str().to_string(),
            self.lambda.map(format_number).unwrap_or_default(),
            format_number(self.sigma0_sq),
            self.m.to_string(),
            format_number(self.log2_m),
            format_number(self.mse_mean),
            format_number(self.mse_db),
            format_number(self.ci_lo),
            format_number(self.ci_hi),
            self.trials.to_string(),
            self.seed.to_string(),
        ]
    }
}

impl CsvRecord for LemmaRow {
    fn header() -> &'static [&'static str] {
        &["n", "delta", "empirical", "theory", "abs_dev"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            format_number(self.delta),
            format_number(self.empirical),
            format_number(self.theory),
            format_number(self.abs_dev),
        ]
    }
}

impl CsvRecord for Theorem1Row {
    fn header() -> &'static [&'static str] {
        &[
            "M",
            "mse_mean",
            "ci_lo",
            "ci_hi",
            "envelope_lo",
            "envelope_hi",
            "e2mn",
            "mean_inside",
            "ci_intersects",
        ]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.m.to_string(),
            format_number(self.mse_mean),
            format_number(self.ci_lo),
            format_number(self.ci_hi),
            format_number(self.envelope_lo),
            format_number(self.envelope_hi),
            format_number(self.e2mn),
            self.mean_inside.to_string(),
            self.ci_intersects.to_string(),
        ]
    }
}

impl CsvRecord for TheoryPoint {
    fn header() -> &'static [&'static str] {
        &[
            "M",
            "linear_mse",
            "e2mn",
            "e2mn_tail_bound",
            "envelope_lo",
            "envelope_hi",
            "C1",
            "C2",
        ]
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.m.to_string()];
        f.extend(
            [
                self.linear_mse,
                self.e2mn,
                self.e2mn_tail_bound,
                self.envelope_lo,
                self.envelope_hi,
                self.c1,
                self.c2,
            ]
            .map(format_number),
        );
        f
    }
}

impl CsvRecord for MomentRow {
    fn header() -> &'static [&'static str] {
        &["scale", "empirical", "theory", "rel_err"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.scale.to_string(),
            format_number(self.empirical),
            format_number(self.theory),
            format_number(self.rel_err),
        ]
    }
}

/// Header line plus one line per row, `\n`-terminated.
pub fn render_table<R: CsvRecord>(rows: &[R]) -> String {
    let mut out = R::header().join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.fields().join(","));
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_table<R: CsvRecord>(rows: &[R], path: &Path) -> Result<()> {
    write_file(path, &render_table(rows))
}

pub fn write_csv(records: &[CurveRecord], path: &Path) -> Result<()> {
    write_table(records, path)
}

/// Configuration and results of one run, as stored in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<C, R> {
    pub config: C,
    pub records: Vec<R>,
}

/// Pretty-printed JSON, `\n`-terminated.
pub fn render_json<C: Serialize, R: Serialize>(doc: &Document<C, R>) -> Result<String> {
    let mut text = serde_json::to_string_pretty(doc).map_err(|source| Error::Json {
        path: "<memory>".into(),
        source,
    })?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<C: Serialize, R: Serialize>(doc: &Document<C, R>, path: &Path) -> Result<()> {
    write_file(path, &render_json(doc)?)
}

pub fn read_json<C: DeserializeOwned, R: DeserializeOwned>(path: &Path) -> Result<Document<C, R>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
