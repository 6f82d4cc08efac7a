use ifalign::aligner::Method;
use ifalign::error::Error;
use ifalign::harness::{
    ingest_logs, run_alignment, simulate_input, simulate_logs, IngestOptions, Logs, RunMeta,
    RunOptions, GPS_FILE, IMU_FILE, TRUTH_FILE,
};
use ifalign::sim::{Scenario, ScenarioConfig, SensorErrors};

fn scenario(duration: f64, gps_rate: Option<f64>) -> Scenario {
    Scenario::new(&ScenarioConfig {
        duration,
        gps_rate,
        ..ScenarioConfig::default()
    })
    .unwrap()
}

#[test]
fn replay_matches_in_memory_pipeline() {
    let sc = scenario(30.0, None);
    let errors = SensorErrors::default();
    let dir = tempfile::tempdir().unwrap();
    simulate_logs(&sc, &errors, 7)
        .unwrap()
        .write_dir(dir.path())
        .unwrap();
    let replayed = Logs::read_dir(dir.path())
        .unwrap()
        .ingest(0.02, &IngestOptions::default())
        .unwrap();
    let memory = simulate_input(&sc, &errors, 7).unwrap();
    assert_eq!(replayed, memory);
    for m in [Method::Vif, Method::Pif] {
        let a = run_alignment(&replayed, m, &RunOptions::default(), RunMeta::default()).unwrap();
        let b = run_alignment(&memory, m, &RunOptions::default(), RunMeta::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}

#[test]
fn replay_without_truth_reports_estimates_only() {
    let sc = scenario(10.0, Some(2.0));
    let dir = tempfile::tempdir().unwrap();
    simulate_logs(&sc, &SensorErrors::ideal(), 0)
        .unwrap()
        .write_dir(dir.path())
        .unwrap();
    std::fs::remove_file(dir.path().join(TRUTH_FILE)).unwrap();
    let input = ingest_logs(
        &dir.path().join(IMU_FILE),
        &dir.path().join(GPS_FILE),
        None,
        0.02,
        &IngestOptions::default(),
    )
    .unwrap();
    assert_eq!(input.fixes.len(), 501);
    let report = run_alignment(
        &input,
        Method::Vif,
        &RunOptions::default(),
        RunMeta::default(),
    )
    .unwrap();
    assert!(report.rows.iter().all(|r| r.error.is_none()));
    assert!(report.rows.last().unwrap().estimate.is_some());
}

#[test]
fn malformed_row_reports_its_line() {
    let sc = scenario(2.0, None);
    let dir = tempfile::tempdir().unwrap();
    simulate_logs(&sc, &SensorErrors::ideal(), 0)
        .unwrap()
        .write_dir(dir.path())
        .unwrap();
    let path = dir.path().join(GPS_FILE);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[4] = "0.06,not-a-number,0,0,0,0,0".into();
    std::fs::write(&path, lines.join("\n")).unwrap();
    match Logs::read_dir(dir.path()) {
        Err(Error::Format { line, .. }) => assert_eq!(line, 5),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sparse_aiding_beyond_the_gap_limit_is_rejected() {
    let sc = scenario(12.0, Some(0.25));
    let logs = simulate_logs(&sc, &SensorErrors::ideal(), 0).unwrap();
    assert!(matches!(
        logs.ingest(0.02, &IngestOptions::default()),
        Err(Error::Gap { .. })
    ));
    assert!(logs.ingest(0.02, &IngestOptions { max_gap: 4.0 }).is_ok());
}

#[test]
fn imu_rate_incompatible_with_the_interval() {
    let sc = scenario(2.0, None);
    let logs = simulate_logs(&sc, &SensorErrors::ideal(), 0).unwrap();
    assert!(matches!(
        logs.ingest(0.03, &IngestOptions::default()),
        Err(Error::RateMismatch { .. })
    ));
}
