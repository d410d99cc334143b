//! Standing test: zero commanded velocity, the robot marches in place.
//! Reports how far the body wanders over 10 seconds.
//!
//! ```text
//! cargo run --release --example standing
//! ```

use compliant_biped::experiment::{compute_metrics, run_experiment, ExperimentConfig};

fn main() {
    let cfg = ExperimentConfig {
        v_body_des: 0.0,
        ..ExperimentConfig::default()
    };
    let run = run_experiment(&cfg).expect("standing run");
    let metrics = compute_metrics(&run.records, cfg.transient_discard).expect("metrics");

    let first = run.records.first().unwrap();
    let last = run.records.last().unwrap();
    let drift = last.body_position[0] - first.body_position[0];
    let max_x = run
        .records
        .iter()
        .map(|r| r.body_position[0].abs())
        .fold(0.0f64, f64::max);

    println!("{}", metrics.summary());
    println!(
        "net drift {:.1} mm over {} s, peak excursion {:.1} mm",
        drift * 1e3,
        cfg.duration,
        max_x * 1e3
    );
}
