use std::path::Path;
use std::process::{Command, Output};

fn ifalign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifalign"))
        .args(args)
        .output()
        .unwrap()
}

fn short_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn simulate_then_align_logs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "[scenario]\nduration = 10.0\n");
    let logs = dir.path().join("logs");
    let out = ifalign(&[
        "simulate",
        "--config",
        &cfg,
        "--seed",
        "4",
        "--out",
        logs.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["imu.csv", "gps.csv", "truth.csv", "config.toml"] {
        assert!(logs.join(f).exists(), "{f}");
    }

    let report = dir.path().join("report");
    let out = ifalign(&[
        "align",
        "--method",
        "pif",
        "--logs",
        logs.to_str().unwrap(),
        "--solve-every",
        "50",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = lines(&report.join("report.csv"));
    assert_eq!(
        rows[0],
        "t_s,roll_deg,pitch_deg,yaw_deg,err_roll_deg,err_pitch_deg,err_yaw_deg,lambda_min"
    );
    assert_eq!(rows.len(), 1 + 10);
    let last: Vec<&str> = rows.last().unwrap().split(',').collect();
    assert!(last[6].parse::<f64>().unwrap().abs() < 10.0);
    assert!(report.join("report.json").exists());
}

#[test]
fn align_is_deterministic_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "[scenario]\nduration = 4.0\n");
    let a = ifalign(&[
        "align",
        "--config",
        &cfg,
        "--run",
        "2",
        "--solve-every",
        "10",
    ]);
    let b = ifalign(&[
        "align",
        "--config",
        &cfg,
        "--run",
        "2",
        "--solve-every",
        "10",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = ifalign(&[
        "align",
        "--config",
        &cfg,
        "--run",
        "2",
        "--solve-every",
        "10",
        "--no-lever-arm",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn malformed_log_exits_with_format_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "[scenario]\nduration = 1.0\n");
    let logs = dir.path().join("logs");
    assert!(ifalign(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        logs.to_str().unwrap()
    ])
    .status
    .success());
    let gps = logs.join("gps.csv");
    let mut text = lines(&gps);
    text[3] = "0.04,1,2".into();
    std::fs::write(&gps, text.join("\n")).unwrap();
    let out = ifalign(&["align", "--logs", logs.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn unknown_config_key_exits_with_format_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "[scenario]\nduraton = 1.0\n");
    assert_eq!(ifalign(&["align", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn persistent_degenerate_spectrum_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(
        dir.path(),
        "[scenario]\nduration = 0.02\n[scenario.velocity.north]\nmean = 0.0\n[scenario.velocity.east]\nmean = 0.0\n\
         [scenario.velocity.up]\nmean = 0.0\n[sensors]\nlever_arm = [0.0, 0.0, 0.0]\ngps_vel_sigma = 0.0\n",
    );
    let out = ifalign(&["align", "--config", &cfg]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn montecarlo_and_oracle_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "[scenario]\nduration = 6.0\n");
    let out_dir = dir.path().join("mc");
    let out = ifalign(&[
        "montecarlo",
        "--method",
        "vif",
        "--config",
        &cfg,
        "--runs",
        "4",
        "--epochs",
        "2,5",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rows = lines(&out_dir.join("summary.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("2,"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["runs_completed"], 4);

    let out = ifalign(&["oracle", "--config", &cfg, "--epochs", "1,2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("t_s,alpha_v_x"));
}

#[test]
fn bundled_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["default.toml", "flight_test_lever_arm.toml"] {
        let text = std::fs::read_to_string(root.join(name)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let cfg = short_config(dir.path(), &format!("{text}\n"));
        let out = ifalign(&[
            "oracle",
            "--config",
            &cfg,
            "--epochs",
            "0.5",
            "--substep",
            "1e-3",
        ]);
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
