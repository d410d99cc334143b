//! Run the reference walking experiment (0.15 m/s for 10 s) and write the
//! per-tick log plus plot-ready CSVs into ./walking_out/.
//!
//! ```text
//! cargo run --release --example walking
//! ```

use compliant_biped::experiment::{
    compute_metrics, emit_plot_data, run_experiment, write_log_csv, ExperimentConfig,
};

fn main() {
    let cfg = ExperimentConfig::default();
    println!(
        "walking at {} m/s, body height {} m, stride {} s, duty factor {}",
        cfg.v_body_des, cfg.y_body_des, cfg.t_str, cfg.beta
    );

    let run = run_experiment(&cfg).expect("walking run");
    let metrics = compute_metrics(&run.records, cfg.transient_discard).expect("metrics");
    println!("{}", metrics.summary());

    let out_dir = std::path::Path::new("walking_out");
    std::fs::create_dir_all(out_dir).expect("create output dir");
    let log_path = out_dir.join("walk_log.csv");
    let mut file = std::io::BufWriter::new(std::fs::File::create(&log_path).expect("log file"));
    write_log_csv(&run.records, &mut file).expect("write log");
    let plots = emit_plot_data(&run.records, out_dir).expect("plot data");

    println!("log: {}", log_path.display());
    for p in plots {
        println!("plot data: {}", p.display());
    }
}
