use std::path::Path;
use std::process::{Command, Output};

fn magwell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magwell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "colour = red\n");
    assert_eq!(code(&magwell(&["birkhoff", "--config", &cfg])), 2);
    let cfg = write_config(dir.path(), "experiment = spectrum\n");
    let out = magwell(&["birkhoff", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("spectrum"));
    assert_eq!(code(&magwell(&["juggle", "--config", &cfg])), 2);
    let missing = dir.path().join("absent.cfg");
    assert_eq!(code(&magwell(&["birkhoff", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // Two grid points cannot carry an order-8 stencil.
    let cfg = write_config(dir.path(), "n = 2\nhbar = 0.02\n");
    let out = magwell(&["spectrum", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failing_tolerance_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // A coarse step misses the period tolerance of criterion 1.
    let cfg = write_config(dir.path(), "criteria = 1\nt_end = 50\ndt = 0.05\n");
    let out_dir = dir.path().join("o");
    let out = magwell(&["report", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
    let metrics = report["criteria"][0]["metrics"].as_array().unwrap();
    assert!(metrics.iter().all(|m| m.get("lower").is_some() && m.get("pass").is_some()));
}

#[test]
fn passing_report_exits_with_zero_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "experiment = report\ncriteria = 1, 3, 7\nt_end = 20\n");
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = magwell(&["report", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", "7"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
        let stdout = String::from_utf8_lossy(&out.stdout);
        assert_eq!(stdout.matches("PASS").count(), 3, "{stdout}");
        assert!(out_dir.join("report.md").exists());
        reports.push(std::fs::read(out_dir.join("report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn experiments_write_their_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "E = 0.05\nt_end = 5\nN = 2\nflow_t_end = 2\nflow_energies = 0.05, 0.025\n");
    let out_dir = dir.path().join("o");
    let o = out_dir.to_str().unwrap();
    for (experiment, files) in [
        ("trajectory", &["trajectory_0.csv", "trajectory_0.svg", "level_set_deviation.csv"][..]),
        ("compare-flows", &["flow_distance.csv", "flow_orders.csv", "flow_distance.svg"][..]),
        ("birkhoff", &["normal_form.json", "normal_form.txt"][..]),
    ] {
        let out = magwell(&[experiment, "--config", &cfg, "--out", o]);
        assert_eq!(code(&out), 0, "{experiment}: {}", String::from_utf8_lossy(&out.stderr));
        for f in files {
            assert!(out_dir.join(f).exists(), "{experiment}: {f}");
        }
    }
    let csv = std::fs::read_to_string(out_dir.join("trajectory_0.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), magwell::symflow::CSV_HEADER);
}
