//! End-to-end tests of the command-line binary: exit codes, output-file
//! invariants, overrides, and failure behavior. The binary is the one
//! cargo built for this test run.

use std::path::Path;
use std::process::{Command, Output};

use hbfkit::channel::read_channel_dump_file;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hbfkit"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn sweep_config() -> &'static str {
    "mode = sweep_snr\n\
     n_tx = 8\n\
     n_rx = 8\n\
     n_rf = 2\n\
     n_streams = 2\n\
     n_subcarriers = 4\n\
     snr_db_grid = 0, 5\n\
     n_realizations = 3\n\
     seed = 1\n"
}

fn single_config() -> &'static str {
    "mode = single_shot\n\
     n_tx = 8\n\
     n_rx = 8\n\
     n_rf = 2\n\
     n_streams = 2\n\
     n_subcarriers = 4\n\
     snr_db = 5\n\
     n_realizations = 2\n\
     seed = 1\n"
}

fn dir_entries(path: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(path)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

// 1. A sweep run exits zero and writes exactly the three result files.
#[test]
fn sweep_writes_exactly_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "sweep.cfg", sweep_config());
    let out = tmp.path().join("out");
    let status = bin()
        .args(["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        dir_entries(&out),
        vec!["metadata.json", "records.csv", "summary.csv"]
    );

    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    let mut lines = records.lines();
    assert_eq!(
        lines.next().unwrap(),
        "axis,axis_value,algorithm,realization,se_bits_per_hz"
    );
    // 2 grid points x 3 realizations x 2 algorithms.
    assert_eq!(lines.count(), 12);

    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "axis,axis_value,algorithm,mean_se"
    );
    assert_eq!(summary.lines().count(), 1 + 4);

    let metadata = std::fs::read_to_string(out.join("metadata.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&metadata).unwrap();
    assert_eq!(json["tool"]["name"], "hbfkit");
    assert_eq!(json["experiment"]["mode"], "sweep_snr");
    assert!(json["wall_clock_secs"].as_f64().unwrap() >= 0.0);
}

// 2. A bad config exits nonzero, names the offending key on stderr, and
//    leaves no partial output behind.
#[test]
fn invalid_config_fails_without_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(
        tmp.path(),
        "bad.cfg",
        &format!("{}typo_key = 3\n", sweep_config()),
    );
    let out = tmp.path().join("out");
    let output = bin()
        .args(["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("typo_key"));
    assert!(!out.exists(), "failed run must not create output files");
}

// 3. Subcommand/mode mismatches are rejected.
#[test]
fn subcommand_mode_mismatch_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "single.cfg", single_config());
    let out = tmp.path().join("out");
    let output = bin()
        .args(["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("sweep_snr or sweep_streams"));
    assert!(!out.exists());
}

// 4. Single-shot prints one SE line per algorithm and needs no out dir.
#[test]
fn single_prints_both_algorithms() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "single.cfg", single_config());
    let output = bin()
        .args(["single", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("hybrid mean SE:"), "stdout was: {stdout}");
    assert!(stdout.contains("dbf    mean SE:"), "stdout was: {stdout}");
    assert!(stdout.contains("bits/s/Hz"));
}

// 5. Seed overrides change the records; repeating a seed reproduces them.
#[test]
fn seed_override_changes_results_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "sweep.cfg", sweep_config());
    let run = |out: &Path, seed: &str| {
        let status = bin()
            .args([
                "sweep",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                seed,
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("records.csv")).unwrap()
    };
    let a = run(&tmp.path().join("a"), "7");
    let b = run(&tmp.path().join("b"), "8");
    let c = run(&tmp.path().join("c"), "7");
    assert_ne!(a, b, "different seeds must change the records");
    assert_eq!(a, c, "equal seeds must reproduce the records");
}

// 6. The complexity scan emits a header plus three rows per scale.
#[test]
fn complexity_scan_row_count_and_header() {
    let output = bin().args(["complexity", "--Lmax", "31"]).output().unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    let mut lines = stdout.lines();
    assert_eq!(lines.next().unwrap(), "L,algorithm,flops,reduction_vs_lsaa");
    assert_eq!(lines.count(), 31 * 3);

    // With --out it writes the CSV plus metadata.
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("scan");
    let status = bin()
        .args(["complexity", "--Lmax", "4", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(dir_entries(&out), vec!["complexity.csv", "metadata.json"]);
    let csv = std::fs::read_to_string(out.join("complexity.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 4 * 3);
}

// 7. dump-channel writes one parseable file per realization.
#[test]
fn dump_channel_writes_parseable_dumps() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "single.cfg", single_config());
    let out = tmp.path().join("dumps");
    let status = bin()
        .args([
            "dump-channel",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--realizations",
            "3",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        dir_entries(&out),
        vec!["channel_0000.txt", "channel_0001.txt", "channel_0002.txt"]
    );
    let ch = read_channel_dump_file(out.join("channel_0002.txt")).unwrap();
    assert_eq!(ch.n_subcarriers(), 4);
    assert_eq!(ch.n_rx(), 8);
    assert_eq!(ch.n_tx(), 8);
}

// 8. A bad thread-count environment variable is a structured failure.
#[test]
fn invalid_thread_env_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "single.cfg", single_config());
    let output = bin()
        .args(["single", "--config", config.to_str().unwrap()])
        .env("HBFKIT_THREADS", "many")
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("HBFKIT_THREADS"));
}

// 9. Missing config files fail cleanly rather than panicking.
#[test]
fn missing_config_file_reports_io_error() {
    let output = bin()
        .args(["single", "--config", "/nonexistent/path.cfg"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = stderr_of(&output);
    assert!(err.starts_with("error:"), "stderr was: {err}");
}

// 10. `single` with an out dir writes the same three files as a sweep.
#[test]
fn single_with_out_dir_writes_result_files() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "single.cfg", single_config());
    let out = tmp.path().join("out");
    let status = bin()
        .args(["single", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        dir_entries(&out),
        vec!["metadata.json", "records.csv", "summary.csv"]
    );
    // One grid point, two realizations, two algorithms.
    let records = std::fs::read_to_string(out.join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + 4);
}
