//! Batch walking-experiment runner.
//!
//! Exit codes: 0 success, 1 the robot fell, 2 the simulation diverged,
//! 3 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use compliant_biped::experiment::{
    emit_plot_data, load_config, run_experiment, ExperimentConfig, ExperimentError,
};
use compliant_biped::sim::SimError;

#[derive(Parser, Debug)]
#[command(
    name = "walk",
    about = "Run a bipedal walking experiment and write its log as CSV"
)]
struct Args {
    /// Flat JSON config; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the simulated duration [s].
    #[arg(long)]
    duration: Option<f64>,

    /// Log CSV path (overrides the config's `output`; default walk_log.csv).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Print the built-in default config as JSON and exit.
    #[arg(long)]
    dump_defaults: bool,

    /// Also write per-figure plot CSVs into this directory.
    #[arg(long)]
    plots: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();

    if args.dump_defaults {
        let defaults = ExperimentConfig::default();
        println!(
            "{}",
            serde_json::to_string_pretty(&defaults).expect("defaults serialize")
        );
        return ExitCode::SUCCESS;
    }

    let mut cfg = match &args.config {
        Some(path) => match load_config(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(3);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(d) = args.duration {
        cfg.duration = d;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.output = Some(
        args.out
            .map(|p| p.display().to_string())
            .or(cfg.output)
            .unwrap_or_else(|| "walk_log.csv".to_string()),
    );

    let run = match run_experiment(&cfg) {
        Ok(run) => run,
        Err(ExperimentError::Config(e)) => {
            eprintln!("config error: {e}");
            return ExitCode::from(3);
        }
        Err(ExperimentError::Sim(SimError::Diverged { t })) => {
            eprintln!("simulation diverged at t = {t:.4} s");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    if let Some(dir) = &args.plots {
        if let Err(e) = emit_plot_data(&run.records, dir) {
            eprintln!("error writing plot data: {e}");
            return ExitCode::from(2);
        }
    }

    println!(
        "{} ticks logged to {}",
        run.records.len(),
        cfg.output.as_deref().unwrap_or("-")
    );
    println!("{}", run.metrics.summary());

    if run.metrics.fell {
        eprintln!("the robot fell (body height dropped below 0.4 m)");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
