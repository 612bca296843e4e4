//! Command-line behaviour: output shapes and exit codes.

use std::process::{Command, Output};

fn cphaar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cphaar"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn mse_curve_csv_on_stdout() {
    let out = cphaar(&[
        "mse-curve",
        "--lambda",
        "10",
        "--m",
        "2,8",
        "--trials",
        "20",
        "--schemes",
        "linear,best",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "process,scheme,dictionary,lambda,sigma0_sq,M,log2_M,mse_mean,mse_db,ci_lo,ci_hi,trials,seed"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("cp,linear,haar,1.0000000000000000e1,"));
}

#[test]
fn brownian_rows_leave_lambda_empty() {
    let out = cphaar(&[
        "mse-curve",
        "--process",
        "bm",
        "--dictionary",
        "dct",
        "--schemes",
        "best",
        "--m",
        "1024",
        "--trials",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("bm,best,dct,,"));
    assert!(row.contains(",-inf,") || row.contains("e-"), "{row}");
}

#[test]
fn config_errors_exit_with_2() {
    for args in [
        vec!["mse-curve", "--lambda", "10", "--m", "8,4"],
        vec![
            "mse-curve",
            "--process",
            "bm",
            "--lambda",
            "10",
            "--dictionary",
            "haar-discrete",
            "--m",
            "4",
        ],
        vec!["mse-curve", "--process", "bm", "--m", "4"],
        vec!["mse-curve", "--m", "4"],
        vec!["mse-curve", "--lambda", "10", "--m", "4", "--trials", "0"],
        vec!["theorem1-check", "--lambda", "400"],
        vec!["lemma-check", "--samples", "10"],
        vec![
            "mse-curve",
            "--lambda",
            "10",
            "--m",
            "4",
            "--schemes",
            "tree",
        ],
    ] {
        let out = cphaar(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_exits_with_3() {
    let out = cphaar(&[
        "theory-table",
        "--lambda",
        "1",
        "--out",
        "/nonexistent/dir/t.csv",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/t.csv"));
}

#[test]
fn theory_table_json_embeds_config() {
    let out = cphaar(&[
        "theory-table",
        "--lambda",
        "1",
        "--m",
        "1,8",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"config\""));
    assert!(text.contains("\"m_values\""));
    assert!(text.contains("\"C2\""));
}

#[test]
fn simulate_matches_trial_stream() {
    let out = cphaar(&["simulate", "--lambda", "50", "--seed", "3", "--trial", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "index,t,value");
    let law = cphaar::JumpLaw::normalized(1.0, 50.0).unwrap();
    let path =
        cphaar::levy_sim::sample_path(50.0, law, &mut cphaar::RandomStream::new(3, 2)).unwrap();
    assert_eq!(text.lines().count(), path.num_jumps() + 1);
}
