//! Experiment harness: flat JSON configuration with embedded defaults,
//! the walking experiment runner, tracking metrics and CSV emission.
//!
//! The configuration is deliberately flat (one scalar per key) so experiment
//! files diff cleanly. Unknown keys are rejected; missing keys fall back to
//! the built-in defaults, which reproduce the reference walking experiment.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::{GaitParams, Setpoint, SwingParams, VmcGains, WalkController};
use crate::low_level::{inverse_kinematics, LowLevelGains};
use crate::model::{BodyState, FootState, RobotParams, RobotState, Side};
use crate::plant::PlantConfig;
use crate::qp::QpStatus;
use crate::sim::{simulate, LogRecord, SimError};

/// A run counts as fallen when the body height dips below this at any tick.
pub const FALL_HEIGHT: f64 = 0.4;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Validation(String),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("output error: {0}")]
    Io(#[from] io::Error),
    #[error("no log records produced")]
    EmptyLog,
}

/// Flat experiment configuration. Every key has a default; unknown keys fail
/// parsing. Angles in rad, lengths in m, forces in N, stiffness in N/m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    // geometry and mass
    pub l_thigh: f64,
    pub p_foot_knee_x: f64,
    pub p_foot_knee_y: f64,
    pub hip_offset_left_x: f64,
    pub hip_offset_left_y: f64,
    pub hip_offset_right_x: f64,
    pub hip_offset_right_y: f64,
    pub k_xx_left: f64,
    pub k_xy_left: f64,
    pub k_yy_left: f64,
    pub k_xx_right: f64,
    pub k_xy_right: f64,
    pub k_yy_right: f64,
    pub m_body: f64,
    pub gravity: f64,
    pub nu_h_min: f64,
    pub nu_h_max: f64,
    pub nu_k_min: f64,
    pub nu_k_max: f64,

    // plant
    pub dt_physics: f64,
    pub dt_control: f64,
    pub motor_time_constant: f64,
    pub motor_velocity_limit: f64,
    pub sensor_cutoff: f64,
    pub sensor_noise_std: f64,
    pub body_velocity_cutoff: f64,
    pub ground_height: f64,
    pub pulloff_threshold: f64,
    pub body_damping: f64,

    // low-level control
    pub p_nu: f64,
    pub p_lambda: f64,
    pub g_min: f64,

    // virtual model control
    pub p_x: f64,
    pub d_x: f64,
    pub p_y: f64,
    pub d_y: f64,

    // gait scheduling and force distribution
    pub t_str: f64,
    pub beta: f64,
    pub theta_l: f64,
    pub theta_r: f64,
    pub lambda_y_min: f64,
    pub lambda_y_max_left: f64,
    pub lambda_y_max_right: f64,
    pub mu: f64,
    pub w_x: f64,

    // swing trajectory
    pub h_swi: f64,
    pub vy_liftoff: f64,
    pub vy_touchdown: f64,
    pub s_apex: f64,
    /// Horizontal touchdown offset; `null` derives `v_body_des * beta * t_str / 2`,
    /// which centers the stance travel on the hip.
    pub step_ahead: Option<f64>,
    pub touchdown_penetration: f64,
    pub dlambda_cutoff: f64,

    // experiment
    pub v_body_des: f64,
    pub y_body_des: f64,
    pub duration: f64,
    pub seed: u64,
    pub output: Option<String>,
    /// Metrics ignore this initial transient [s].
    pub transient_discard: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            l_thigh: 0.35,
            p_foot_knee_x: -0.1034,
            p_foot_knee_y: -0.2856,
            hip_offset_left_x: 0.0,
            hip_offset_left_y: 0.0,
            hip_offset_right_x: 0.0,
            hip_offset_right_y: 0.0,
            k_xx_left: 1600.0,
            k_xy_left: 500.0,
            k_yy_left: 8000.0,
            k_xx_right: 1600.0,
            k_xy_right: 500.0,
            k_yy_right: 8000.0,
            m_body: 9.0,
            gravity: 9.81,
            nu_h_min: -1.5,
            nu_h_max: 1.5,
            nu_k_min: -2.5,
            nu_k_max: 0.2,
            dt_physics: 1e-4,
            dt_control: 1e-3,
            motor_time_constant: 0.02,
            motor_velocity_limit: 6.0,
            sensor_cutoff: 100.0,
            sensor_noise_std: 0.0,
            body_velocity_cutoff: 20.0,
            ground_height: 0.0,
            pulloff_threshold: 0.0,
            body_damping: 30.0,
            p_nu: 10.0,
            p_lambda: 2.5,
            g_min: 1.0,
            p_x: 300.0,
            d_x: 34.6,
            p_y: 2000.0,
            d_y: 89.4,
            t_str: 1.2,
            beta: 0.6,
            theta_l: 0.0,
            theta_r: 0.5,
            lambda_y_min: 5.0,
            lambda_y_max_left: 350.0,
            lambda_y_max_right: 350.0,
            mu: 0.5,
            w_x: 1.0,
            h_swi: 0.05,
            vy_liftoff: 0.1,
            vy_touchdown: -0.1,
            s_apex: 0.5,
            step_ahead: None,
            touchdown_penetration: 0.005,
            dlambda_cutoff: 50.0,
            v_body_des: 0.15,
            y_body_des: 0.62,
            duration: 10.0,
            seed: 0,
            output: None,
            transient_discard: 2.0,
        }
    }
}

impl ExperimentConfig {
    pub fn robot_params(&self) -> RobotParams {
        RobotParams {
            l_thigh: self.l_thigh,
            p_foot_knee: Vector2::new(self.p_foot_knee_x, self.p_foot_knee_y),
            stiffness_left: Matrix2::new(
                self.k_xx_left,
                self.k_xy_left,
                self.k_xy_left,
                self.k_yy_left,
            ),
            stiffness_right: Matrix2::new(
                self.k_xx_right,
                self.k_xy_right,
                self.k_xy_right,
                self.k_yy_right,
            ),
            m_body: self.m_body,
            gravity: self.gravity,
            hip_offset_left: Vector2::new(self.hip_offset_left_x, self.hip_offset_left_y),
            hip_offset_right: Vector2::new(self.hip_offset_right_x, self.hip_offset_right_y),
            hip_range: (self.nu_h_min, self.nu_h_max),
            knee_range: (self.nu_k_min, self.nu_k_max),
        }
    }

    pub fn plant_config(&self) -> PlantConfig {
        PlantConfig {
            dt_physics: self.dt_physics,
            dt_control: self.dt_control,
            motor_time_constant: self.motor_time_constant,
            motor_velocity_limit: self.motor_velocity_limit,
            sensor_cutoff: self.sensor_cutoff,
            sensor_noise_std: self.sensor_noise_std,
            body_velocity_cutoff: self.body_velocity_cutoff,
            ground_height: self.ground_height,
            pulloff_threshold: self.pulloff_threshold,
            body_damping: self.body_damping,
        }
    }

    pub fn low_level_gains(&self) -> LowLevelGains {
        LowLevelGains {
            p_position: Matrix2::identity() * self.p_nu,
            p_force: Matrix2::identity() * self.p_lambda,
            velocity_limit: self.motor_velocity_limit,
            det_g_min: self.g_min,
        }
    }

    pub fn vmc_gains(&self) -> VmcGains {
        VmcGains {
            p_x: self.p_x,
            d_x: self.d_x,
            p_y: self.p_y,
            d_y: self.d_y,
        }
    }

    pub fn gait_params(&self) -> GaitParams {
        GaitParams {
            stride_time: self.t_str,
            duty_factor: self.beta,
            phase: [self.theta_l, self.theta_r],
            lambda_y_min: self.lambda_y_min,
            lambda_y_max: [self.lambda_y_max_left, self.lambda_y_max_right],
            friction: self.mu,
            weight_x: self.w_x,
        }
    }

    /// Touchdown offset: explicit value or half the stance travel.
    pub fn resolved_step_ahead(&self) -> f64 {
        self.step_ahead
            .unwrap_or(self.v_body_des * self.beta * self.t_str / 2.0)
    }

    pub fn swing_params(&self) -> SwingParams {
        SwingParams {
            apex_height: self.h_swi,
            liftoff_velocity: self.vy_liftoff,
            touchdown_velocity: self.vy_touchdown,
            step_ahead: self.resolved_step_ahead(),
            apex_phase: self.s_apex,
        }
    }

    pub fn setpoint(&self) -> Setpoint {
        Setpoint {
            v_body: self.v_body_des,
            y_body: self.y_body_des,
            x0: 0.0,
            ground_height: self.ground_height,
            touchdown_penetration: self.touchdown_penetration,
            dlambda_cutoff: self.dlambda_cutoff,
        }
    }

    pub fn controller(&self) -> WalkController {
        WalkController::new(
            self.robot_params(),
            self.vmc_gains(),
            self.low_level_gains(),
            self.gait_params(),
            self.swing_params(),
            self.setpoint(),
            self.dt_control,
        )
    }

    /// Standing start: body at the desired height, both feet pinned on the
    /// ground directly below their hips, springs undeformed.
    pub fn initial_state(&self) -> Result<RobotState, ConfigError> {
        let params = self.robot_params();
        let body = BodyState::at(0.0, self.y_body_des);
        let mut state = RobotState {
            body,
            ..Default::default()
        };
        for side in Side::BOTH {
            let target = Vector2::new(params.hip_offset(side).x, self.ground_height);
            let joints = inverse_kinematics(&params, target, Vector2::zeros(), &body, side)
                .map_err(|e| {
                    ConfigError::Validation(format!(
                        "cannot place {side:?} foot on the ground at y_body_des = {}: {e}",
                        self.y_body_des
                    ))
                })?;
            state.joints[side.idx()] = joints;
            state.feet[side.idx()] = FootState {
                position: target,
                pinned: true,
            };
        }
        Ok(state)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |msg: String| Err(ConfigError::Validation(msg));

        let params = self.robot_params();
        if let Err(e) = params.validate() {
            return err(e.to_string());
        }
        if let Err(e) = params.check_reach(self.y_body_des - self.ground_height) {
            return err(format!("y_body_des: {e}"));
        }
        if let Err(e) = self.plant_config().validate() {
            return err(e.to_string());
        }
        if let Err(e) = self.gait_params().validate() {
            return err(e);
        }
        if let Err(e) = self.swing_params().validate() {
            return err(e);
        }
        if let Err(e) = self.vmc_gains().validate() {
            return err(e);
        }
        if !(self.p_nu > 0.0) {
            return err(format!("p_nu must be positive, got {}", self.p_nu));
        }
        if !(self.p_lambda > 0.0) {
            return err(format!("p_lambda must be positive, got {}", self.p_lambda));
        }
        if !(self.g_min > 0.0) {
            return err(format!("g_min must be positive, got {}", self.g_min));
        }
        if !(self.dlambda_cutoff > 0.0) {
            return err(format!(
                "dlambda_cutoff must be positive, got {}",
                self.dlambda_cutoff
            ));
        }
        if !(self.duration > 0.0) {
            return err(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.transient_discard >= 0.0) {
            return err(format!(
                "transient_discard must be non-negative, got {}",
                self.transient_discard
            ));
        }
        if !self.v_body_des.is_finite() || !(self.y_body_des > 0.0) {
            return err("v_body_des must be finite and y_body_des positive".into());
        }
        Ok(())
    }
}

/// Parse a flat JSON config file, fill defaults, validate all invariants.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Tracking metrics over the post-transient analysis window. Fields are
/// `None` when the window holds fewer than two records. `fell` is judged over
/// the whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub mean_forward_velocity: Option<f64>,
    pub steady_state_x_offset: Option<f64>,
    pub max_height_error: Option<f64>,
    pub rms_height_error: Option<f64>,
    pub fell: bool,
    pub stride_count: u32,
    /// Length of the analysis window [s].
    pub window_seconds: f64,
}

impl Metrics {
    pub fn summary(&self) -> String {
        let fmt = |v: Option<f64>, scale: f64, unit: &str| match v {
            Some(v) => format!("{:.2} {unit}", v * scale),
            None => "n/a".into(),
        };
        format!(
            "mean velocity {}, x offset {}, height error max {} / rms {}, strides {}, fell: {}",
            fmt(self.mean_forward_velocity, 1.0, "m/s"),
            fmt(self.steady_state_x_offset, 1e3, "mm"),
            fmt(self.max_height_error, 1e3, "mm"),
            fmt(self.rms_height_error, 1e3, "mm"),
            self.stride_count,
            self.fell
        )
    }
}

/// Compute metrics from a log, discarding the first `transient_discard`
/// seconds for everything except the fall check.
pub fn compute_metrics(
    records: &[LogRecord],
    transient_discard: f64,
) -> Result<Metrics, ExperimentError> {
    if records.is_empty() {
        return Err(ExperimentError::EmptyLog);
    }
    let fell = records.iter().any(|r| r.body_position[1] < FALL_HEIGHT);
    let window: Vec<&LogRecord> = records
        .iter()
        .filter(|r| r.t >= transient_discard)
        .collect();

    if window.len() < 2 {
        return Ok(Metrics {
            mean_forward_velocity: None,
            steady_state_x_offset: None,
            max_height_error: None,
            rms_height_error: None,
            fell,
            stride_count: 0,
            window_seconds: 0.0,
        });
    }

    let first = window.first().unwrap();
    let last = window.last().unwrap();
    let span = last.t - first.t;
    let mean_velocity = (last.body_position[0] - first.body_position[0]) / span;

    let n = window.len() as f64;
    let x_offset = window
        .iter()
        .map(|r| r.body_position_des[0] - r.body_position[0])
        .sum::<f64>()
        / n;
    let mut max_height_error: f64 = 0.0;
    let mut sq_sum = 0.0;
    for r in &window {
        let e = (r.body_position_des[1] - r.body_position[1]).abs();
        max_height_error = max_height_error.max(e);
        sq_sum += e * e;
    }

    let mut stride_count = 0;
    for pair in records.windows(2) {
        if pair[1].t >= transient_discard && pair[0].contact[0] && !pair[1].contact[0] {
            stride_count += 1;
        }
    }

    Ok(Metrics {
        mean_forward_velocity: Some(mean_velocity),
        steady_state_x_offset: Some(x_offset),
        max_height_error: Some(max_height_error),
        rms_height_error: Some((sq_sum / n).sqrt()),
        fell,
        stride_count,
        window_seconds: span,
    })
}

/// Result of one experiment run.
#[derive(Debug)]
pub struct ExperimentRun {
    pub metrics: Metrics,
    pub records: Vec<LogRecord>,
}

/// Wire up controller and plant from the config, simulate, compute metrics
/// and (when `cfg.output` is set) write the log CSV.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun, ExperimentError> {
    cfg.validate()?;
    let params = cfg.robot_params();
    let plant = cfg.plant_config();
    let mut controller = cfg.controller();
    let initial = cfg.initial_state()?;

    let records = simulate(
        &plant,
        &params,
        initial,
        &mut controller,
        cfg.duration,
        cfg.seed,
    )?;
    let metrics = compute_metrics(&records, cfg.transient_discard)?;

    if let Some(path) = &cfg.output {
        let mut file = io::BufWriter::new(fs::File::create(path)?);
        write_log_csv(&records, &mut file)?;
    }
    Ok(ExperimentRun { metrics, records })
}

/// Nine significant digits: enough to round-trip the trajectory for
/// regression snapshots while keeping files diffable.
fn fmt9(v: f64) -> String {
    format!("{v:.8e}")
}

pub const LOG_CSV_HEADER: &str = "t,x_b,y_b,x_b_des,y_b_des,\
nu_h_left,nu_k_left,nu_h_right,nu_k_right,\
lambda_x_left,lambda_y_left,lambda_x_right,lambda_y_right,\
lambda_x_des_left,lambda_y_des_left,lambda_x_des_right,lambda_y_des_right,\
contact_left,contact_right,s_swing_left,s_swing_right,\
qp_status,singular_left,singular_right,unreachable_left,unreachable_right";

fn qp_status_code(status: QpStatus) -> u8 {
    match status {
        QpStatus::Optimal => 0,
        QpStatus::Infeasible => 1,
        QpStatus::MaxIterations => 2,
    }
}

/// Write the full per-tick log as CSV. Output is byte-stable for a given
/// record sequence.
pub fn write_log_csv<W: Write>(records: &[LogRecord], out: &mut W) -> io::Result<()> {
    writeln!(out, "{LOG_CSV_HEADER}")?;
    for r in records {
        let mut fields: Vec<String> = vec![
            fmt9(r.t),
            fmt9(r.body_position[0]),
            fmt9(r.body_position[1]),
            fmt9(r.body_position_des[0]),
            fmt9(r.body_position_des[1]),
        ];
        for leg in 0..2 {
            fields.push(fmt9(r.joint_angles[leg][0]));
            fields.push(fmt9(r.joint_angles[leg][1]));
        }
        for leg in 0..2 {
            fields.push(fmt9(r.lambda[leg][0]));
            fields.push(fmt9(r.lambda[leg][1]));
        }
        for leg in 0..2 {
            fields.push(fmt9(r.lambda_des[leg][0]));
            fields.push(fmt9(r.lambda_des[leg][1]));
        }
        fields.push((r.contact[0] as u8).to_string());
        fields.push((r.contact[1] as u8).to_string());
        fields.push(fmt9(r.s_swing[0]));
        fields.push(fmt9(r.s_swing[1]));
        fields.push(qp_status_code(r.qp_status).to_string());
        fields.push((r.singular[0] as u8).to_string());
        fields.push((r.singular[1] as u8).to_string());
        fields.push((r.unreachable[0] as u8).to_string());
        fields.push((r.unreachable[1] as u8).to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Render the whole log to an in-memory CSV byte buffer.
pub fn log_csv_bytes(records: &[LogRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_log_csv(records, &mut buf).expect("in-memory write cannot fail");
    buf
}

/// Write per-figure CSVs (body tracking, per-leg forces, gait phases) into
/// `out_dir` for external plotting. Returns the created paths.
pub fn emit_plot_data(records: &[LogRecord], out_dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut created = Vec::new();

    let body_path = out_dir.join("body_tracking.csv");
    {
        let mut f = io::BufWriter::new(fs::File::create(&body_path)?);
        writeln!(f, "t,x_b,x_b_des,y_b,y_b_des")?;
        for r in records {
            writeln!(
                f,
                "{},{},{},{},{}",
                fmt9(r.t),
                fmt9(r.body_position[0]),
                fmt9(r.body_position_des[0]),
                fmt9(r.body_position[1]),
                fmt9(r.body_position_des[1]),
            )?;
        }
    }
    created.push(body_path);

    for (leg, name) in [(0, "forces_left.csv"), (1, "forces_right.csv")] {
        let path = out_dir.join(name);
        let mut f = io::BufWriter::new(fs::File::create(&path)?);
        writeln!(f, "t,lambda_x,lambda_y,lambda_x_des,lambda_y_des")?;
        for r in records {
            writeln!(
                f,
                "{},{},{},{},{}",
                fmt9(r.t),
                fmt9(r.lambda[leg][0]),
                fmt9(r.lambda[leg][1]),
                fmt9(r.lambda_des[leg][0]),
                fmt9(r.lambda_des[leg][1]),
            )?;
        }
        created.push(path);
    }

    let gait_path = out_dir.join("gait_phase.csv");
    {
        let mut f = io::BufWriter::new(fs::File::create(&gait_path)?);
        writeln!(f, "t,contact_left,contact_right,s_swing_left,s_swing_right")?;
        for r in records {
            writeln!(
                f,
                "{},{},{},{},{}",
                fmt9(r.t),
                r.contact[0] as u8,
                r.contact[1] as u8,
                fmt9(r.s_swing[0]),
                fmt9(r.s_swing[1]),
            )?;
        }
    }
    created.push(gait_path);
    Ok(created)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_yields_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.p_lambda, 2.5);
        assert_eq!(cfg.t_str, 1.2);
        assert_eq!(cfg.beta, 0.6);
        assert_eq!(cfg.mu, 0.5);
        assert!(cfg.validate().is_ok());
        // derived touchdown offset: v * beta * T / 2
        assert!((cfg.resolved_step_ahead() - 0.054).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_value_names_the_key() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"beta": 1.5}"#).unwrap();
        let err = cfg.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("beta"), "message should name the key: {msg}");
        assert!(
            msg.contains("(0, 1)"),
            "message should state the bound: {msg}"
        );
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let result: Result<ExperimentConfig, _> = serde_json::from_str(r#"{"betta": 0.6}"#);
        assert!(result.is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig {
            v_body_des: 0.12,
            seed: 99,
            step_ahead: Some(0.03),
            output: Some("out.csv".into()),
            ..ExperimentConfig::default()
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let parsed: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn invalid_stiffness_is_caught() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"k_xy_left": 9000.0}"#).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unreachable_height_is_caught() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"y_body_des": 0.7}"#).unwrap();
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("y_body_des"), "{msg}");
    }

    fn synthetic_records(n: usize, dt: f64) -> Vec<LogRecord> {
        (0..n)
            .map(|k| {
                let t = k as f64 * dt;
                LogRecord {
                    t,
                    body_position: [0.15 * t, 0.62],
                    body_position_des: [0.15 * t, 0.62],
                    joint_angles: [[0.3, -0.8]; 2],
                    lambda: [[0.0, 44.0]; 2],
                    lambda_des: [[0.0, 44.1]; 2],
                    contact: [true, true],
                    s_swing: [0.0, 0.5],
                    qp_status: QpStatus::Optimal,
                    singular: [false; 2],
                    unreachable: [false; 2],
                }
            })
            .collect()
    }

    #[test]
    fn metrics_on_synthetic_constant_velocity() {
        let records = synthetic_records(5000, 1e-3);
        let m = compute_metrics(&records, 2.0).unwrap();
        assert!((m.mean_forward_velocity.unwrap() - 0.15).abs() < 1e-12);
        assert!(m.steady_state_x_offset.unwrap().abs() < 1e-12);
        assert_eq!(m.max_height_error.unwrap(), 0.0);
        assert!(!m.fell);
    }

    #[test]
    fn metrics_constant_height_error() {
        let mut records = synthetic_records(5000, 1e-3);
        for r in &mut records {
            r.body_position[1] = 0.58; // constant 0.04 error
        }
        let m = compute_metrics(&records, 2.0).unwrap();
        assert!((m.max_height_error.unwrap() - 0.04).abs() < 1e-12);
        assert!((m.rms_height_error.unwrap() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn single_dip_sets_fell() {
        let mut records = synthetic_records(5000, 1e-3);
        records[100].body_position[1] = 0.39; // inside the discarded transient
        let m = compute_metrics(&records, 2.0).unwrap();
        assert!(m.fell);
    }

    #[test]
    fn degenerate_window_reports_not_available() {
        let records = synthetic_records(1, 1e-3);
        let m = compute_metrics(&records, 2.0).unwrap();
        assert_eq!(m.mean_forward_velocity, None);
        assert_eq!(m.max_height_error, None);
        assert_eq!(m.window_seconds, 0.0);
        assert!(!m.fell);

        assert!(matches!(
            compute_metrics(&[], 2.0),
            Err(ExperimentError::EmptyLog)
        ));
    }

    #[test]
    fn stride_count_counts_liftoff_edges() {
        let mut records = synthetic_records(6000, 1e-3);
        // two left-leg lift-offs after the transient, one before
        for r in records.iter_mut() {
            let t = r.t;
            let in_swing = |t0: f64| t > t0 && t < t0 + 0.3;
            r.contact[0] = !(in_swing(1.0) || in_swing(3.0) || in_swing(5.0));
        }
        let m = compute_metrics(&records, 2.0).unwrap();
        assert_eq!(m.stride_count, 2);
    }

    #[test]
    fn csv_shape_and_round_trip() {
        let records = synthetic_records(10, 1e-3);
        let bytes = log_csv_bytes(&records);
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert_eq!(header, LOG_CSV_HEADER);
        assert_eq!(header.split(',').count(), 26);

        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), records.len());
        for (row, record) in rows.iter().zip(&records) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 26);
            // values survive the format at nine significant digits
            let x: f64 = fields[1].parse().unwrap();
            let rel =
                (x - record.body_position[0]).abs() / record.body_position[0].abs().max(1e-12);
            assert!(rel < 1e-8, "9-digit round trip violated: {x}");
        }
    }

    #[test]
    fn plot_data_files_have_expected_shape() {
        let dir = std::env::temp_dir().join(format!("biped_plots_{}", std::process::id()));
        let records = synthetic_records(25, 1e-3);
        let files = emit_plot_data(&records, &dir).unwrap();
        assert_eq!(files.len(), 4);
        for path in &files {
            let text = fs::read_to_string(path).unwrap();
            assert_eq!(text.lines().count(), records.len() + 1);
        }
        let body = fs::read_to_string(&files[0]).unwrap();
        assert!(body.starts_with("t,x_b,x_b_des,y_b,y_b_des"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let dir = std::env::temp_dir().join(format!("biped_badcfg_{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("broken.json");
        fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load_config(&path), Err(ConfigError::Parse(_))));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn single_tick_run_reports_not_available_metrics() {
        let cfg = ExperimentConfig {
            duration: 0.001,
            ..ExperimentConfig::default()
        };
        let run = run_experiment(&cfg).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.metrics.mean_forward_velocity, None);
        assert_eq!(run.metrics.rms_height_error, None);
        assert!(!run.metrics.fell);
    }

    #[test]
    fn initial_state_stands_on_the_ground() {
        let cfg = ExperimentConfig::default();
        let state = cfg.initial_state().unwrap();
        let params = cfg.robot_params();
        for side in Side::BOTH {
            let foot = state.foot(side);
            assert!(foot.pinned);
            assert!((foot.position.y - 0.0).abs() < 1e-12);
            // undeformed: nominal coincides with the pinned position
            let nominal =
                crate::model::nominal_foot_position(&params, &state.body, state.joint(side), side);
            assert!((nominal - foot.position).norm() < 1e-9);
            assert!(params.joints_within_limits(state.joint(side)));
        }
    }
}
