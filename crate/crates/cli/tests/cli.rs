//! End-to-end checks of the `semipit` binary: subcommands, flags, output
//! files, exit codes and run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn semipit(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semipit"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn validate_config_accepts_shipped_scenarios() {
    let dir = scenario_dir();
    for name in [
        "nominal.toml",
        "snr_vs_distance.toml",
        "snr_vs_angle.toml",
        "snr_vs_power.toml",
        "symbol_pipeline.toml",
        "noisy_environment.toml",
        "battery_lifespan.toml",
    ] {
        let out = semipit(&["validate-config", "--scenario", name], &dir);
        assert!(
            out.status.success(),
            "{name} rejected: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn validate_config_rejects_bad_scenarios_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");

    // Missing seed: parse-level rejection.
    std::fs::write(&bad, "noise_profile = \"nominal\"\n").unwrap();
    let out = semipit(
        &["validate-config", "--scenario", bad.to_str().unwrap()],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    // Out-of-envelope geometry: contract-level rejection, nonzero exit.
    std::fs::write(&bad, "seed = 1\n[geometry]\nbend_angle_deg = 90.0\n").unwrap();
    let out = semipit(
        &["validate-config", "--scenario", bad.to_str().unwrap()],
        tmp.path(),
    );
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bend angle"), "stderr: {stderr}");
}

#[test]
fn power_report_emits_reference_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = semipit(
        &["power-report", "--out", tmp.path().to_str().unwrap()],
        &scenario_dir(),
    );
    assert!(out.status.success());
    let lifespan = std::fs::read_to_string(tmp.path().join("battery_lifespan.csv")).unwrap();
    assert!(lifespan.starts_with("active_hours_per_day,lifespan_20mah_h,lifespan_27mah_h"));
    assert!(lifespan.contains("24,167.0,225.5"), "table: {lifespan}");
    let components = std::fs::read_to_string(tmp.path().join("power_components.csv")).unwrap();
    assert!(components.contains("Measured total,25,449"));

    // NDJSON variant of the table format.
    let out = semipit(
        &[
            "power-report",
            "--out",
            tmp.path().to_str().unwrap(),
            "--format",
            "ndjson",
        ],
        &scenario_dir(),
    );
    assert!(out.status.success());
    let nd = std::fs::read_to_string(tmp.path().join("battery_lifespan.ndjson")).unwrap();
    assert_eq!(nd.lines().count(), 6);
    let first: serde_json::Value = serde_json::from_str(nd.lines().next().unwrap()).unwrap();
    assert_eq!(first["active_hours_per_day"], 24.0);
}

#[test]
fn snr_sweep_is_deterministic_per_seed() {
    let tmp_a = tempfile::tempdir().unwrap();
    let tmp_b = tempfile::tempdir().unwrap();
    let scenario = scenario_dir().join("snr_vs_angle.toml");
    for tmp in [&tmp_a, &tmp_b] {
        let out = semipit(
            &[
                "snr-sweep",
                "--scenario",
                scenario.to_str().unwrap(),
                "--seed",
                "7",
                "--out",
                tmp.path().to_str().unwrap(),
            ],
            &scenario_dir(),
        );
        assert!(
            out.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let a = std::fs::read(tmp_a.path().join("snr_angle.csv")).unwrap();
    let b = std::fs::read(tmp_b.path().join("snr_angle.csv")).unwrap();
    assert_eq!(a, b, "same seed must give identical tables");
    assert!(tmp_a.path().join("snr_angle.svg").exists(), "plot emitted");

    // A different seed changes the sampled values.
    let tmp_c = tempfile::tempdir().unwrap();
    let out = semipit(
        &[
            "snr-sweep",
            "--scenario",
            scenario.to_str().unwrap(),
            "--seed",
            "8",
            "--out",
            tmp_c.path().to_str().unwrap(),
        ],
        &scenario_dir(),
    );
    assert!(out.status.success());
    let c = std::fs::read(tmp_c.path().join("snr_angle.csv")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn pipeline_replays_scripts_and_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = scenario_dir().join("symbol_pipeline.toml");
    let out = semipit(
        &[
            "pipeline",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        &scenario_dir(),
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("accuracy"), "stdout: {stdout}");

    let events = std::fs::read_to_string(tmp.path().join("events.ndjson")).unwrap();
    let first: serde_json::Value = serde_json::from_str(events.lines().next().unwrap()).unwrap();
    assert!(first.get("t").is_some() && first.get("symbol").is_some());

    let actions = std::fs::read_to_string(tmp.path().join("actions.ndjson")).unwrap();
    assert!(actions.lines().any(|l| l.contains("\"press\"")));
    assert!(actions.lines().any(|l| l.contains("\"scroll\"")));

    let confusion = std::fs::read_to_string(tmp.path().join("confusion.csv")).unwrap();
    assert!(confusion.starts_with("truth,decoded_none,"));
}

#[test]
fn unknown_subcommand_fails_with_usage() {
    let out = semipit(&["frobnicate"], &scenario_dir());
    assert!(!out.status.success());
}
