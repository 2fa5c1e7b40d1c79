//! End-to-end tests of the `momord` binary: exit codes, JSON report shape,
//! CSV handling, and output determinism.

use serde_json::Value;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn momord(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momord"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn estimate_examples_match_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.csv"), "1\n2\n3\n").unwrap();
    let out = momord(
        &[
            "estimate",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--spec",
            "mean",
            "--input",
            "g.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["spec_version"], "1.0.0");
    assert_eq!(doc["request"]["command"], "estimate");
    assert_eq!(doc["request"]["params"]["alpha"], 2.0);
    assert_eq!(doc["result"]["theta_hat"], 1.0);
    assert_eq!(doc["result"]["n"], 3);

    // optional header line `x`
    fs::write(dir.path().join("u.csv"), "x\n1\n3\n").unwrap();
    let out = momord(
        &[
            "estimate",
            "--family",
            "uniform_scale",
            "--spec",
            "mean",
            "--input",
            "u.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout_json(&out)["result"]["theta_hat"], 4.0);
}

#[test]
fn estimate_writes_output_file_atomically() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.csv"), "1\n2\n3\n").unwrap();
    let out = momord(
        &[
            "estimate",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--spec",
            "mean",
            "--input",
            "g.csv",
            "--output",
            "report.json",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty(), "report went to the file, not stdout");
    let doc: Value =
        serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(doc["result"]["theta_hat"], 1.0);
    // no leftover temp files
    let stray: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| {
            let name = e.file_name();
            name != "g.csv" && name != "report.json"
        })
        .collect();
    assert!(stray.is_empty(), "stray files: {stray:?}");
}

#[test]
fn estimate_input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();

    fs::write(dir.path().join("empty.csv"), "").unwrap();
    let out = momord(
        &[
            "estimate",
            "--family",
            "uniform_scale",
            "--spec",
            "mean",
            "--input",
            "empty.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);

    fs::write(dir.path().join("bad.csv"), "1.5\noops\n2.5\n").unwrap();
    let out = momord(
        &[
            "estimate",
            "--family",
            "uniform_scale",
            "--spec",
            "mean",
            "--input",
            "bad.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);
    let doc = stdout_json(&out);
    assert_eq!(doc["error"]["kind"], "input");
    assert!(
        doc["error"]["message"].as_str().unwrap().contains("line 2"),
        "message should name the offending line: {}",
        doc["error"]["message"]
    );

    let out = momord(
        &[
            "estimate",
            "--family",
            "uniform_scale",
            "--spec",
            "mean",
            "--input",
            "missing.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);

    let out = momord(
        &[
            "estimate",
            "--family",
            "no_such_family",
            "--spec",
            "mean",
            "--input",
            "bad.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn estimate_infeasible_exits_2_with_machine_readable_error() {
    let dir = tempfile::tempdir().unwrap();
    // mean log is negative for every theta; data above 1 puts gbar outside
    fs::write(dir.path().join("w.csv"), "2\n3\n").unwrap();
    let out = momord(
        &[
            "estimate",
            "--family",
            "weibull_theta",
            "--spec",
            "log",
            "--input",
            "w.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);
    let doc = stdout_json(&out);
    assert_eq!(doc["error"]["kind"], "domain");
    assert_eq!(doc["error"]["code"], 2);
}

#[test]
fn check_family_reports_condition_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = momord(
        &[
            "check-family",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--theta",
            "0.5",
            "--theta2",
            "4",
            "--grid-size",
            "128",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["tp2"]["verdict"], "holds");
    for entry in doc["result"]["logconcave"].as_array().unwrap() {
        assert_eq!(entry["report"]["verdict"], "holds");
    }
    assert_eq!(doc["result"]["moment_monotone"]["direction"], "increasing");

    // shape 1/2 gamma densities blow up at zero: not logconcave
    let out = momord(
        &[
            "check-family",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=0.5",
            "--theta",
            "0.5",
            "--theta2",
            "4",
            "--grid-size",
            "128",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let first = &doc["result"]["logconcave"][0]["report"];
    assert_eq!(first["verdict"], "fails");
    assert!(!first["witnesses"].as_array().unwrap().is_empty());

    let out = momord(
        &[
            "check-family",
            "--family",
            "uniform_sym",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--grid-size",
            "64",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["tp2"]["verdict"], "fails");
    assert!(!doc["result"]["tp2"]["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn check_order_compares_two_parameter_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = momord(
        &[
            "check-order",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--grid-size",
            "256",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    for order in ["st", "lr", "disp"] {
        assert_eq!(doc["result"][order]["verdict"], "holds", "{order}");
    }

    // unordered pair is a usage error
    let out = momord(
        &[
            "check-order",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--theta",
            "2",
            "--theta2",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);

    // theta outside the parameter domain is a domain error
    let out = momord(
        &[
            "check-order",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--theta",
            "-1",
            "--theta2",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn simulate_is_deterministic_and_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--family",
        "gamma_scale",
        "--param",
        "alpha=2",
        "--spec",
        "mean",
        "--claim",
        "mean-lr",
        "--theta",
        "1",
        "--theta2",
        "2",
        "--n",
        "10",
        "--reps",
        "1000",
        "--seed",
        "7",
    ];
    let a = momord(&args, dir.path());
    let b = momord(&args, dir.path());
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout, "same request, same bytes");

    let doc = stdout_json(&a);
    assert_eq!(doc["request"]["estimator"], "moment-spec:mean");
    assert_eq!(doc["request"]["claim"], "mean-lr");
    assert_eq!(doc["request"]["seed"], 7);
    assert_eq!(doc["result"]["st_report"]["verdict"], "holds");
    assert_eq!(doc["result"]["lr_report"]["verdict"], "holds");
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert!(stderr.contains("st: holds"), "stderr: {stderr}");
    assert!(stderr.contains("lr: holds"), "stderr: {stderr}");
}

#[test]
fn simulate_csv_format_emits_replicate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = momord(
        &[
            "simulate",
            "--family",
            "uniform_scale",
            "--spec",
            "mean",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--n",
            "5",
            "--reps",
            "1000",
            "--format",
            "csv",
            "--output",
            "runs.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let text = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("replicate,theta,theta_hat"));
    assert_eq!(lines.count(), 2000);

    // csv is simulate-only
    let csv_elsewhere = momord(
        &[
            "check-order",
            "--family",
            "uniform_scale",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&csv_elsewhere), 3);
}

#[test]
fn simulate_rejects_bad_requests() {
    let dir = tempfile::tempdir().unwrap();
    // claim incompatible with the estimator
    let out = momord(
        &[
            "simulate",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--spec",
            "mean",
            "--claim",
            "location-lr",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--n",
            "10",
            "--reps",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);

    // neither --estimator nor --spec
    let out = momord(
        &[
            "simulate",
            "--family",
            "gamma_scale",
            "--param",
            "alpha=2",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--n",
            "10",
            "--reps",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 3);

    // too-frequent infeasibility invalidates the experiment
    let out = momord(
        &[
            "simulate",
            "--family",
            "weibull_theta",
            "--spec",
            "log",
            "--theta",
            "1",
            "--theta2",
            "2",
            "--n",
            "1",
            "--reps",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 2);
    assert_eq!(stdout_json(&out)["error"]["kind"], "domain");
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = momord(&["--help"], dir.path());
    assert_eq!(exit_code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("simulate"));

    // unknown flag is a usage error: exit 3, not clap's default 2
    let out = momord(&["estimate", "--bogus"], dir.path());
    assert_eq!(exit_code(&out), 3);
}
