//! End-to-end tests against the built binary.

use std::process::{Command, Output};

fn qprog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qprog"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 output")
}

#[test]
fn multicopy_exact_reports_93_over_128() {
    let output = qprog(&[
        "run",
        "--scheme",
        "multicopy-iterative",
        "--n",
        "7",
        "--theta",
        "0.7",
        "--mode",
        "exact",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["exact"]["rational"], "93/128");
    assert_eq!(report["formula"]["rational"], "93/128");
    assert_eq!(report["exact"]["decimal"], 0.7265625);
}

#[test]
fn preprocess_reports_q_table() {
    let output = qprog(&["run", "--scheme", "preprocess", "--x", "3", "--format", "json"]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["exact"]["rational"], "93/128");
    let q_table = report["q_table"].as_array().unwrap();
    let rationals: Vec<&str> = q_table
        .iter()
        .map(|entry| entry["rational"].as_str().unwrap())
        .collect();
    assert_eq!(rationals, vec!["1/8", "13/16", "1/16"]);
}

#[test]
fn preprocess_accepts_matching_n() {
    let output = qprog(&["run", "--scheme", "preprocess", "--n", "7", "--format", "json"]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["x"], 3);
}

#[test]
fn json_output_round_trips_byte_identically() {
    for args in [
        vec!["run", "--scheme", "single-shot", "--n", "3", "--format", "json"],
        vec!["table", "--n-max", "7", "--format", "json"],
        vec!["plan", "--x", "3", "--format", "json"],
        vec![
            "run",
            "--scheme",
            "vmc",
            "--n",
            "3",
            "--mode",
            "montecarlo",
            "--trials",
            "2000",
            "--seed",
            "5",
            "--format",
            "json",
        ],
    ] {
        let output = qprog(&args);
        assert!(output.status.success(), "{args:?}");
        let text = stdout(&output);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let reserialized = serde_json::to_string_pretty(&parsed).unwrap();
        assert_eq!(text.trim_end(), reserialized, "{args:?}");
    }
}

#[test]
fn identical_seed_gives_byte_identical_output() {
    let args = [
        "run",
        "--scheme",
        "multicopy-iterative",
        "--n",
        "7",
        "--mode",
        "montecarlo",
        "--trials",
        "20000",
        "--seed",
        "42",
        "--format",
        "json",
    ];
    let first = qprog(&args);
    let second = qprog(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn montecarlo_rate_is_close_to_exact() {
    let output = qprog(&[
        "run",
        "--scheme",
        "vmc",
        "--n",
        "3",
        "--mode",
        "montecarlo",
        "--trials",
        "100000",
        "--seed",
        "0",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let rate = report["empirical_rate"].as_f64().unwrap();
    let p = 7.0 / 8.0;
    let tolerance = 4.0 * (p * (1.0 - p) / 100_000f64).sqrt();
    assert!((rate - p).abs() < tolerance);
}

#[test]
fn table_csv_has_expected_rows() {
    let output = qprog(&["table", "--format", "csv"]);
    assert!(output.status.success());
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "N,p_vmc,p_multicopy,p_single_shot,p_preprocess,p_asymptotic"
    );
    assert!(lines[2].starts_with("3,7/8,5/8,5/8,5/8,"));
    assert!(lines[4].starts_with("7,127/128,93/128,93/128,93/128,"));
    // n = 5 is not of the form 2^x - 1: preprocess column is blank.
    assert!(lines[3].starts_with("5,31/32,11/16,11/16,,"));
    assert!(lines[8].starts_with("15,32767/32768,26333/32768,26333/32768,26333/32768,"));
}

#[test]
fn plan_reports_group_counts() {
    let output = qprog(&["plan", "--x", "3", "--format", "json"]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["groups"].as_array().unwrap().len(), 35);
    let counts = report["group_counts"].as_array().unwrap();
    assert_eq!(counts[0]["level"], 3);
    assert_eq!(counts[0]["groups"], 1);
    assert_eq!(counts[1]["groups"], 26);
    assert_eq!(counts[2]["groups"], 8);

    let trivial = qprog(&["plan", "--x", "1", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&trivial)).unwrap();
    assert_eq!(report["groups"].as_array().unwrap().len(), 1);
    assert_eq!(report["groups"][0]["level"], 1);
}

#[test]
fn cnot_scheme_reports_half() {
    let output = qprog(&["run", "--scheme", "cnot", "--format", "json"]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["exact"]["rational"], "1/2");
    assert_eq!(report["n"], 1);
}

#[test]
fn custom_data_state_is_accepted() {
    let output = qprog(&[
        "run",
        "--scheme",
        "single-shot",
        "--n",
        "3",
        "--data",
        "0.6,0.0,0.0,0.8",
        "--format",
        "json",
    ]);
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["exact"]["rational"], "5/8");
}

#[test]
fn equivalence_table_scheme_matches_table_command() {
    let via_run = qprog(&["run", "--scheme", "equivalence-table", "--n", "7", "--format", "csv"]);
    let via_table = qprog(&["table", "--n-max", "7", "--format", "csv"]);
    assert!(via_run.status.success());
    assert_eq!(via_run.stdout, via_table.stdout);
}

#[test]
fn validation_failures_exit_with_code_two() {
    let cases: Vec<Vec<&str>> = vec![
        // copies not of the form 2^x - 1
        vec!["run", "--scheme", "preprocess", "--n", "6"],
        // preprocess size out of range
        vec!["run", "--scheme", "preprocess", "--x", "5"],
        // missing --n
        vec!["run", "--scheme", "vmc"],
        // unnormalized data state
        vec!["run", "--scheme", "cnot", "--data", "1,0,1,0"],
        // malformed data state
        vec!["run", "--scheme", "cnot", "--data", "1,0"],
        // zero trials in montecarlo mode
        vec!["run", "--scheme", "vmc", "--n", "3", "--mode", "montecarlo", "--trials", "0"],
        // inconsistent --n and --x
        vec!["run", "--scheme", "preprocess", "--n", "7", "--x", "2"],
        // table cap
        vec!["table", "--n-max", "17"],
        // unknown scheme (clap-level)
        vec!["run", "--scheme", "warp"],
    ];
    for args in cases {
        let output = qprog(&args);
        assert_eq!(output.status.code(), Some(2), "{args:?}");
        assert!(!output.stderr.is_empty(), "{args:?}");
    }
}
