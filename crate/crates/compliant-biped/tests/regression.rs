//! Behavioral regression guards for the experiment harness: the standing
//! case, the canonical walking metrics snapshot, and log well-formedness.

use compliant_biped::experiment::{compute_metrics, load_config, run_experiment, ExperimentConfig};

#[test]
fn standing_robot_barely_drifts() {
    // zero commanded velocity: the robot marches in place and must stay put
    let cfg = ExperimentConfig {
        v_body_des: 0.0,
        ..ExperimentConfig::default()
    };
    let run = run_experiment(&cfg).unwrap();
    let metrics = compute_metrics(&run.records, cfg.transient_discard).unwrap();
    assert!(!metrics.fell);

    let first = run.records.first().unwrap().body_position[0];
    let last = run.records.last().unwrap().body_position[0];
    let drift = (last - first).abs();
    assert!(
        drift < 0.02,
        "standing drift {:.1} mm over 10 s exceeds 20 mm",
        drift * 1e3
    );
}

/// Frozen from the canonical walking run. A change here means the walking
/// trajectory itself changed; update deliberately, not casually.
#[test]
fn canonical_walking_metrics_snapshot() {
    let cfg = ExperimentConfig::default();
    let run = run_experiment(&cfg).unwrap();
    let m = compute_metrics(&run.records, 2.0).unwrap();

    let close = |value: f64, reference: f64| (value - reference).abs() < 1e-9;
    assert!(close(
        m.mean_forward_velocity.unwrap(),
        1.4775334556519124e-1
    ));
    assert!(close(
        m.steady_state_x_offset.unwrap(),
        2.3407216562116216e-2
    ));
    assert!(close(m.max_height_error.unwrap(), 7.330236762100761e-3));
    assert!(close(m.rms_height_error.unwrap(), 3.811533728892281e-3));
    assert_eq!(m.stride_count, 7);
    assert!(!m.fell);
}

#[test]
fn every_logged_value_is_finite() {
    let cfg = ExperimentConfig {
        duration: 3.0,
        sensor_noise_std: 0.2,
        ..ExperimentConfig::default()
    };
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.records.len(), 3000);
    for record in &run.records {
        assert!(record.all_finite(), "non-finite value at t = {}", record.t);
    }
}

#[test]
fn config_file_round_trip_through_disk() {
    let dir = std::env::temp_dir().join(format!("biped_cfg_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("experiment.json");

    let cfg = ExperimentConfig {
        duration: 1.5,
        seed: 7,
        ..ExperimentConfig::default()
    };
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let loaded = load_config(&path).unwrap();
    assert_eq!(loaded, cfg);
    std::fs::remove_dir_all(&dir).ok();
}
