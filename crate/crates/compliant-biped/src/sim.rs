//! Fixed-timestep simulation loop: the controller runs at the control rate,
//! the plant and sensor filters advance at the physics rate in between, and
//! one log record is appended per control tick. Runs are deterministic for a
//! given RNG seed.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::control::{ControlOutput, Controller};
use crate::model::{RobotParams, RobotState};
use crate::plant::{contact_update, plant_step, PlantConfig, PlantError, SensorModel};
use crate::qp::QpStatus;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("simulation diverged at t = {t:.4} s")]
    Diverged { t: f64 },
    #[error("plant configuration invalid: {0}")]
    InvalidConfig(String),
}

/// One control tick's worth of simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub t: f64,
    pub body_position: [f64; 2],
    pub body_position_des: [f64; 2],
    /// Joint angles (hip, knee) per leg.
    pub joint_angles: [[f64; 2]; 2],
    /// Filtered sensor forces per leg.
    pub lambda: [[f64; 2]; 2],
    /// Desired contact forces per leg.
    pub lambda_des: [[f64; 2]; 2],
    /// Contact phase per leg: `true` = stance.
    pub contact: [bool; 2],
    /// Normalized swing time per leg.
    pub s_swing: [f64; 2],
    pub qp_status: QpStatus,
    pub singular: [bool; 2],
    pub unreachable: [bool; 2],
}

impl LogRecord {
    fn from_tick(t: f64, state: &RobotState, out: &ControlOutput) -> Self {
        Self {
            t,
            body_position: [state.body.position.x, state.body.position.y],
            body_position_des: [out.body_ref.0.x, out.body_ref.0.y],
            joint_angles: [
                [state.joints[0].angles.x, state.joints[0].angles.y],
                [state.joints[1].angles.x, state.joints[1].angles.y],
            ],
            lambda: [[0.0; 2]; 2],
            lambda_des: [
                [out.desired.lambda[0], out.desired.lambda[1]],
                [out.desired.lambda[2], out.desired.lambda[3]],
            ],
            contact: out.contact,
            s_swing: out.s_swing,
            qp_status: out.diagnostics.qp_status,
            singular: out.diagnostics.singular,
            unreachable: out.diagnostics.unreachable,
        }
    }

    pub fn all_finite(&self) -> bool {
        let mut vals = vec![
            self.t,
            self.body_position[0],
            self.body_position[1],
            self.body_position_des[0],
            self.body_position_des[1],
        ];
        for i in 0..2 {
            vals.extend_from_slice(&self.joint_angles[i]);
            vals.extend_from_slice(&self.lambda[i]);
            vals.extend_from_slice(&self.lambda_des[i]);
            vals.push(self.s_swing[i]);
        }
        vals.iter().all(|v| v.is_finite())
    }
}

/// Run `controller` against the plant for `duration` seconds and collect one
/// record per control tick.
pub fn simulate<C: Controller>(
    cfg: &PlantConfig,
    params: &RobotParams,
    initial: RobotState,
    controller: &mut C,
    duration: f64,
    seed: u64,
) -> Result<Vec<LogRecord>, SimError> {
    cfg.validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    params
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;

    let substeps = cfg.substeps_per_tick();
    let ticks = (duration / cfg.dt_control).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sensors = SensorModel::new(params, &initial);
    let mut state = initial;
    let mut records = Vec::with_capacity(ticks);

    for k in 0..ticks {
        let t = k as f64 * cfg.dt_control;
        let reading = sensors.read(&state);
        let out = controller.control(t, &reading);

        let mut record = LogRecord::from_tick(t, &state, &out);
        record.lambda = [
            [reading.lambda_filtered[0].x, reading.lambda_filtered[0].y],
            [reading.lambda_filtered[1].x, reading.lambda_filtered[1].y],
        ];
        if !record.all_finite() {
            return Err(SimError::Diverged { t });
        }
        records.push(record);

        for _ in 0..substeps {
            state = plant_step(cfg, params, &state, &out.commands, cfg.dt_physics).map_err(
                |e| match e {
                    PlantError::Diverged => SimError::Diverged { t },
                    PlantError::InvalidConfig(msg) => SimError::InvalidConfig(msg),
                },
            )?;
            state = contact_update(cfg, params, &state);
            sensors.update(cfg, params, &state, cfg.dt_physics, &mut rng);
        }
    }
    Ok(records)
}
