//! Monte Carlo orchestration: determinism, aggregation and file output.

use cphaar::harness::{
    read_json, render_table, run_dict_compare, run_lemma_check, run_mse_curve, trial_errors,
    write_csv, write_json, CurveRecord, Document, ExperimentConfig,
};
use cphaar::schemes::Scheme;
use cphaar::{Dictionary, Error, ProcessKind};

fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        trials: 64,
        master_seed: 42,
        ..ExperimentConfig::compound_poisson(
            10.0,
            vec![Scheme::Linear, Scheme::Greedy, Scheme::Best],
            vec![1, 3, 8, 32],
        )
    }
}

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let config = small_config();
    let one = with_threads(1, || run_mse_curve(&config).unwrap());
    let many = with_threads(7, || run_mse_curve(&config).unwrap());
    assert_eq!(render_table(&one), render_table(&many));
    let bm = ExperimentConfig::brownian(vec![Scheme::Best], vec![4, 64]);
    let a = with_threads(1, || run_mse_curve(&bm).unwrap());
    let b = with_threads(5, || run_mse_curve(&bm).unwrap());
    assert_eq!(a, b);
}

#[test]
fn mean_is_the_average_of_trial_errors() {
    let config = small_config();
    let records = run_mse_curve(&config).unwrap();
    let trials: Vec<Vec<f64>> = (0..config.trials as u64)
        .map(|t| trial_errors(&config, t).unwrap())
        .collect();
    for (idx, r) in records.iter().enumerate() {
        let plain: f64 = trials.iter().map(|e| e[idx]).sum::<f64>() / config.trials as f64;
        assert!((r.mse_mean - plain).abs() <= 1e-12 * plain);
        assert!((r.mse_db - 10.0 * r.mse_mean.log10()).abs() <= 1e-12);
        assert!(r.ci_lo <= r.mse_mean && r.mse_mean <= r.ci_hi);
    }
}

#[test]
fn linear_mean_covers_prediction() {
    let config = ExperimentConfig {
        master_seed: 1,
        ..ExperimentConfig::compound_poisson(10.0, vec![Scheme::Linear], vec![8])
    };
    let r = &run_mse_curve(&config).unwrap()[0];
    let target = 1.0 / 48.0;
    assert!(r.ci_lo <= target && target <= r.ci_hi, "{r:?}");
}

#[test]
fn csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_csv(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("process,scheme,dictionary,lambda,sigma0_sq,M,log2_M,"));

    let config = ExperimentConfig {
        trials: 1,
        ..small_config()
    };
    let one = &run_mse_curve(&config).unwrap()[..1];
    write_csv(one, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(fields.len(), 13);
    assert_eq!(&fields[..3], ["cp", "linear", "haar"]);
}

#[test]
fn zero_mean_is_written_as_minus_inf() {
    // M = 2^L keeps every discrete coefficient
    let config = ExperimentConfig {
        trials: 3,
        grid_log2: 4,
        dictionary: Dictionary::HaarDiscrete,
        ..ExperimentConfig::compound_poisson(10.0, vec![Scheme::Best], vec![16])
    };
    let records = run_mse_curve(&config).unwrap();
    assert_eq!(records[0].mse_mean, 0.0);
    assert_eq!(records[0].mse_db, f64::NEG_INFINITY);
    let csv = render_table(&records);
    assert!(csv.lines().nth(1).unwrap().contains(",-inf,"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.json");
    let doc = Document { config, records };
    write_json(&doc, &path).unwrap();
    let back: Document<ExperimentConfig, CurveRecord> = read_json(&path).unwrap();
    assert_eq!(back, doc);
}

#[test]
fn json_round_trip() {
    let config = ExperimentConfig {
        lambda: Some(0.1),
        ..small_config()
    };
    let records = run_mse_curve(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let doc = Document { config, records };
    write_json(&doc, &path).unwrap();
    let back: Document<ExperimentConfig, CurveRecord> = read_json(&path).unwrap();
    assert_eq!(back, doc);
}

#[test]
fn io_errors_carry_the_path() {
    let err = write_csv(&[], std::path::Path::new("/nonexistent/dir/out.csv")).unwrap_err();
    match err {
        Error::Io { path, .. } => assert!(path.ends_with("out.csv")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn lemma_check_edge_columns() {
    let report = run_lemma_check(10.0, &[1, 2], &[0.0, 0.25, 0.5], 20_000, 3).unwrap();
    for row in &report.rows {
        if row.delta == 0.0 {
            assert_eq!(row.empirical, 1.0);
        }
        if row.n == 2 && row.delta == 0.5 {
            assert_eq!(row.empirical, 0.0);
        }
    }
    let r = report
        .rows
        .iter()
        .find(|r| r.n == 1 && r.delta == 0.5)
        .unwrap();
    assert!((r.empirical - 0.5).abs() < 0.02);
    assert_eq!(report.spacing_violations, 0);
    assert!(report.paths_with_jumps > 19_000);
    assert!(run_lemma_check(10.0, &[1], &[0.1], 999, 3).is_err());
}

#[test]
fn dict_compare_full_budget_is_exact() {
    let records = run_dict_compare(10.0, 1.0, &[4, 16], 4, 10, 5).unwrap();
    assert_eq!(records.len(), 8);
    for r in records.iter().filter(|r| r.m == 16) {
        assert!(r.mse_mean.abs() < 1e-20, "{r:?}");
    }
    let kinds: Vec<_> = records.iter().map(|r| (r.process, r.dictionary)).collect();
    assert!(kinds.contains(&(ProcessKind::Bm, Dictionary::Dct)));
}
