//! Exit-code contract and output checks for the command-line interface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coopsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const RUN_CONFIG: &str = r#"{
  "profiles": [
    { "id": 1, "class": "real_time", "target_per": 0.001, "priority": 0 },
    { "id": 2, "class": "non_real_time", "target_per": 0.00025, "priority": 1 }
  ],
  "link_models": [
    { "fixed_per": { "per": 0.001 } },
    { "fixed_per": { "per": 0.0005 } }
  ],
  "rd_rate": [11.0, 11.0],
  "allocator": "adaptive",
  "duration_bursts": 500
}"#;

#[test]
fn no_subcommand_is_usage_error() {
    let output = coopsim(&[]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let output = coopsim(&["frobnicate"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_usage_error() {
    let output = coopsim(&["alloc", "--per1", "0.001", "--bogus", "1"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_required_config_is_usage_error() {
    let output = coopsim(&["run"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn alloc_closed_form_example() {
    // a = t2/t1 = 2 and per = (0.001, 0.0005) integerize to (2, 8).
    let output = coopsim(&[
        "alloc", "--per1", "0.001", "--per2", "0.0005", "--t1", "0.002", "--t2", "0.004",
        "--k", "10",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let report = stdout(&output);
    assert!(report.contains("N1=2 N2=8"), "report:\n{report}");
    assert!(report.contains("brute-force optimum"), "report:\n{report}");
}

#[test]
fn alloc_symmetric_example() {
    let output = coopsim(&[
        "alloc", "--per1", "0.0005", "--per2", "0.0005", "--t1", "0.001", "--t2", "0.001",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("N1=5 N2=5"));
}

#[test]
fn alloc_zero_pers_reports_uniform_fallback() {
    let output = coopsim(&[
        "alloc", "--per1", "0", "--per2", "0", "--t1", "0.001", "--t2", "0.001",
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("uniform fallback"));
}

#[test]
fn alloc_invalid_range_is_runtime_error() {
    let output = coopsim(&[
        "alloc", "--per1", "1.5", "--per2", "0.0005", "--t1", "0.001", "--t2", "0.001",
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(!String::from_utf8(output.stderr).unwrap().is_empty());

    let output = coopsim(&[
        "alloc", "--per1=-0.5", "--per2", "0.0005", "--t1", "0.001", "--t2", "0.001",
    ]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn run_emits_csv_and_seed_preamble() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.json", RUN_CONFIG);
    let out = dir.path().join("result.csv");
    let output = coopsim(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("# seed: 1"), "stderr:\n{stderr}");
    let body = fs::read_to_string(&out).unwrap();
    let mut lines = body.lines();
    assert!(lines.next().unwrap().starts_with("sweep,coordinate,scheme,"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("run,0.00000000e0,adaptive,"));
    assert_eq!(lines.next(), None);
}

#[test]
fn seed_override_changes_output_and_is_printed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "run.json", RUN_CONFIG);
    let base = coopsim(&["run", "--config", &config]);
    let reseeded = coopsim(&["run", "--config", &config, "--seed", "42"]);
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(reseeded.status.code(), Some(0));
    assert!(String::from_utf8(reseeded.stderr.clone())
        .unwrap()
        .contains("# seed: 42"));
    assert_ne!(stdout(&base), stdout(&reseeded));
}

#[test]
fn malformed_config_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", "{ not json");
    let output = coopsim(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn invalid_simulation_config_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "zero.json",
        &RUN_CONFIG.replace("\"duration_bursts\": 500", "\"duration_bursts\": 0"),
    );
    let output = coopsim(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8(output.stderr)
        .unwrap()
        .contains("duration_bursts"));
}

#[test]
fn sweep_relays_reports_gains_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "relays.json",
        r#"{ "relay_counts": [0, 1, 2], "samples_per_point": 2000 }"#,
    );
    let output = coopsim(&["sweep-relays", "--config", &config]);
    assert_eq!(output.status.code(), Some(0));
    let stderr = String::from_utf8(output.stderr.clone()).unwrap();
    assert!(stderr.contains("gain 0 -> 1 relays"), "stderr:\n{stderr}");
    assert!(stderr.contains("reference figure 22%"));
    let body = stdout(&output);
    assert_eq!(body.lines().count(), 4); // header + three rows
    assert!(body.lines().nth(1).unwrap().starts_with("relays,0.00000000e0,adaptive,,,"));
}

#[test]
fn sweep_ratio_emits_paired_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "ratio.json",
        r#"{ "a_values": [0.5, 2.0], "duration_bursts": 300 }"#,
    );
    let output = coopsim(&["sweep-ratio", "--config", &config]);
    assert_eq!(output.status.code(), Some(0));
    let body = stdout(&output);
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 5); // header + 2 coordinates x 2 schemes
    assert!(lines[1].starts_with("ratio,5.00000000e-1,adaptive,"));
    assert!(lines[2].starts_with("ratio,5.00000000e-1,uniform,"));
    assert!(lines[3].starts_with("ratio,2.00000000e0,adaptive,"));
}
