use ifalign::aligner::Method;
use ifalign::harness::{monte_carlo, reintegrate_navigation, simulate_input};
use ifalign::sim::{Scenario, ScenarioConfig, SensorErrors, Trajectory};

#[test]
fn reintegration_reproduces_truth_over_300_s() {
    let cfg = ScenarioConfig::default();
    let traj = Trajectory::new(&cfg).unwrap();
    let (c, v, p) = reintegrate_navigation(&traj, cfg.duration, 1e-3).unwrap();
    let truth = traj.state_at(cfg.duration).unwrap();
    let dc = (c.matrix() - truth.c_b_n.matrix()).norm();
    let dv = (v.0 - truth.v.0).norm();
    let dp = (p.as_vector() - truth.p.as_vector()).abs();
    assert!(dc < 1e-8, "attitude {dc:e}");
    assert!(dv < 1e-8, "velocity {dv:e} m/s");
    assert!(
        dp[0] < 1e-8 && dp[1] < 1e-8 && dp[2] < 1e-8,
        "position {dp:?}"
    );
}

#[test]
fn reintegration_of_a_turning_profile() {
    let mut cfg = ScenarioConfig::default();
    cfg.attitude.yaw.amplitude = 90.0;
    cfg.attitude.yaw.period = 30.0;
    cfg.position.lat_deg = -45.0;
    cfg.duration = 60.0;
    let traj = Trajectory::new(&cfg).unwrap();
    let (c, v, _) = reintegrate_navigation(&traj, cfg.duration, 1e-3).unwrap();
    let truth = traj.state_at(cfg.duration).unwrap();
    assert!((c.matrix() - truth.c_b_n.matrix()).norm() < 1e-8);
    assert!((v.0 - truth.v.0).norm() < 1e-8);
}

#[test]
fn noiseless_batches_have_zero_spread() {
    let cfg = ScenarioConfig {
        duration: 20.0,
        ..ScenarioConfig::default()
    };
    let scenario = Scenario::new(&cfg).unwrap();
    let errors = SensorErrors {
        lever_arm: [1.0, 1.0, 1.0],
        ..SensorErrors::ideal()
    };
    for m in [Method::Vif, Method::Pif] {
        let s = monte_carlo(&scenario, &errors, 4, m, &[5.0, 20.0], None).unwrap();
        assert_eq!(s.runs_completed, 4);
        for e in &s.epochs {
            assert_eq!(e.three_sigma, [0.0; 3]);
        }
    }
}

#[test]
fn runs_differ_only_through_their_streams() {
    let cfg = ScenarioConfig {
        duration: 5.0,
        ..ScenarioConfig::default()
    };
    let scenario = Scenario::new(&cfg).unwrap();
    let errors = SensorErrors::default();
    let a = simulate_input(&scenario, &errors, 0).unwrap();
    let b = simulate_input(&scenario, &errors, 1).unwrap();
    assert_eq!(a, simulate_input(&scenario, &errors, 0).unwrap());
    assert_ne!(a.intervals, b.intervals);
    assert_ne!(a.fixes, b.fixes);
    assert_eq!(a.truth, b.truth);
}
