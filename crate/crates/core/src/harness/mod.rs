//! Seeded, parallel Monte Carlo experiments and their flat-file output.
//!
//! Trial `t` of a run always draws from `RandomStream::new(master_seed, t)`
//! and per-trial results are reduced in trial order, so every output is a
//! pure function of the configuration, independent of the worker count.

mod config;
mod output;
mod runs;
mod stats;

pub use config::{Dictionary, ExperimentConfig};
pub use output::{
    format_number, read_json, render_json, render_table, write_csv, write_json, write_table,
    CsvRecord, Document,
};
pub use runs::{
    run_coefficient_moments, run_dict_compare, run_lemma_check, run_mse_curve, run_theorem1_check,
    theory_table, trial_errors, CurveRecord, LemmaReport, LemmaRow, MomentRow, Theorem1Row,
    ORDER_SLACK,
};
pub use stats::{summarize, Summary};
