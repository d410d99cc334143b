//! Simulated robot hardware: motor velocity lag, point-mass body dynamics
//! under the elastic leg forces, unilateral ground contact with pinning, and
//! the force/torque sensor model.
//!
//! Integration is semi-implicit (symplectic) Euler at a fixed physics step.
//! The stiff leg springs (~8 kN/m on a 9 kg body) put the highest mode near
//! 5 Hz, comfortably resolved at the 0.1 ms default step; updating velocities
//! before positions avoids the energy growth plain explicit Euler exhibits on
//! oscillators.

use nalgebra::Vector2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::low_level::MotorCommand;
use crate::model::{
    elastic_force, nominal_foot_position, FootState, JointState, RobotParams, RobotState, Side,
};

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("simulation diverged: state magnitude exceeded 1e6")]
    Diverged,
    #[error("plant configuration invalid: {0}")]
    InvalidConfig(String),
}

/// Timing, motor, sensor and ground parameters of the simulated plant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantConfig {
    /// Physics integration step [s].
    pub dt_physics: f64,
    /// Controller period [s]; must be an integer multiple of `dt_physics`.
    pub dt_control: f64,
    /// First-order lag of the velocity-regulated drives [s].
    pub motor_time_constant: f64,
    /// Hard clamp on joint velocities [rad/s].
    pub motor_velocity_limit: f64,
    /// Built-in low-pass of the force sensors [Hz].
    pub sensor_cutoff: f64,
    /// Standard deviation of additive force sensor noise [N].
    pub sensor_noise_std: f64,
    /// Low-pass on the differentiated body velocity channel [Hz].
    pub body_velocity_cutoff: f64,
    /// Ground surface height [m].
    pub ground_height: f64,
    /// A pinned foot releases when its vertical elastic force drops to or
    /// below this [N].
    pub pulloff_threshold: f64,
    /// Viscous damping on the body [N s/m], standing in for unmodeled
    /// structural damping of the steel springs.
    pub body_damping: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
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
        }
    }
}

impl PlantConfig {
    pub fn validate(&self) -> Result<(), PlantError> {
        if !(self.dt_physics > 0.0) || !(self.dt_control > 0.0) {
            return Err(PlantError::InvalidConfig(
                "dt_physics and dt_control must be positive".into(),
            ));
        }
        if self.dt_physics > self.dt_control {
            return Err(PlantError::InvalidConfig(format!(
                "dt_physics {} exceeds dt_control {}",
                self.dt_physics, self.dt_control
            )));
        }
        let ratio = self.dt_control / self.dt_physics;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(PlantError::InvalidConfig(format!(
                "dt_control must be an integer multiple of dt_physics (ratio {ratio})"
            )));
        }
        if !(self.motor_time_constant > 0.0) {
            return Err(PlantError::InvalidConfig(
                "motor_time_constant must be positive".into(),
            ));
        }
        if !(self.sensor_cutoff > 0.0) || !(self.body_velocity_cutoff > 0.0) {
            return Err(PlantError::InvalidConfig(
                "filter cutoffs must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn substeps_per_tick(&self) -> usize {
        (self.dt_control / self.dt_physics).round() as usize
    }
}

/// Advance the plant by one physics step.
///
/// Joint velocities chase the (clamped) commands through a first-order lag;
/// the body accelerates under gravity, viscous damping and the elastic forces
/// of pinned legs; unpinned feet ride along at their nominal position since
/// the legs are massless. Velocities update before positions.
pub fn plant_step(
    cfg: &PlantConfig,
    params: &RobotParams,
    state: &RobotState,
    commands: &[MotorCommand; 2],
    dt: f64,
) -> Result<RobotState, PlantError> {
    let mut next = state.clone();

    // spring forces at the pre-step configuration
    let mut force = Vector2::new(0.0, -params.m_body * params.gravity);
    force -= cfg.body_damping * state.body.velocity;
    for side in Side::BOTH {
        if state.foot(side).pinned {
            force += elastic_force(params, state, side);
        }
    }

    let limit = cfg.motor_velocity_limit;
    for side in Side::BOTH {
        let u = commands[side.idx()]
            .velocity
            .map(|v| v.clamp(-limit, limit));
        let joint = next.joint_mut(side);
        joint.velocities += (u - joint.velocities) * (dt / cfg.motor_time_constant);
        joint.velocities = joint.velocities.map(|v| v.clamp(-limit, limit));
        joint.angles += dt * joint.velocities;
    }

    next.body.velocity += dt * force / params.m_body;
    next.body.position += dt * next.body.velocity;

    for side in Side::BOTH {
        if !next.foot(side).pinned {
            next.foot_mut(side).position =
                nominal_foot_position(params, &next.body, next.joint(side), side);
        }
    }

    if !next.all_finite() || next.max_abs() > 1e6 {
        return Err(PlantError::Diverged);
    }
    Ok(next)
}

/// Resolve ground contact: pin unpinned feet whose nominal position has
/// penetrated the ground, release pinned feet whose vertical elastic force
/// has dropped to the pull-off threshold. Pinned feet never move.
pub fn contact_update(cfg: &PlantConfig, params: &RobotParams, state: &RobotState) -> RobotState {
    let mut next = state.clone();
    for side in Side::BOTH {
        let nominal = nominal_foot_position(params, &state.body, state.joint(side), side);
        if !state.foot(side).pinned {
            if nominal.y <= cfg.ground_height {
                *next.foot_mut(side) = FootState {
                    position: Vector2::new(nominal.x, cfg.ground_height),
                    pinned: true,
                };
            }
        } else if elastic_force(params, state, side).y <= cfg.pulloff_threshold {
            *next.foot_mut(side) = FootState {
                position: nominal,
                pinned: false,
            };
        }
    }
    next
}

/// What the controller can see: filtered forces, exact joint encoders, the
/// planarizer's body position and its low-passed velocity estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorReading {
    pub lambda_filtered: [Vector2<f64>; 2],
    pub joints: [JointState; 2],
    pub body_position: Vector2<f64>,
    pub body_velocity: Vector2<f64>,
}

/// First-order sensor filters, advanced once per physics substep. Filters are
/// seeded from the first raw sample instead of zero to avoid an artificial
/// start-up transient.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    force: [Vector2<f64>; 2],
    body_velocity: Vector2<f64>,
}

impl SensorModel {
    pub fn new(params: &RobotParams, state: &RobotState) -> Self {
        Self {
            force: [
                elastic_force(params, state, Side::Left),
                elastic_force(params, state, Side::Right),
            ],
            body_velocity: state.body.velocity,
        }
    }

    /// Advance the filters by one substep of length `dt`.
    pub fn update<R: Rng>(
        &mut self,
        cfg: &PlantConfig,
        params: &RobotParams,
        state: &RobotState,
        dt: f64,
        rng: &mut R,
    ) {
        // exact zero-order-hold discretization of the RC filter
        let alpha_f = 1.0 - (-dt * 2.0 * std::f64::consts::PI * cfg.sensor_cutoff).exp();
        let alpha_v = 1.0 - (-dt * 2.0 * std::f64::consts::PI * cfg.body_velocity_cutoff).exp();
        for side in Side::BOTH {
            let mut raw = elastic_force(params, state, side);
            if cfg.sensor_noise_std > 0.0 {
                let dist = Normal::new(0.0, cfg.sensor_noise_std).expect("valid noise std");
                raw += Vector2::new(dist.sample(rng), dist.sample(rng));
            }
            let f = &mut self.force[side.idx()];
            *f += alpha_f * (raw - *f);
        }
        self.body_velocity += alpha_v * (state.body.velocity - self.body_velocity);
    }

    pub fn read(&self, state: &RobotState) -> SensorReading {
        SensorReading {
            lambda_filtered: self.force,
            joints: state.joints,
            body_position: state.body.position,
            body_velocity: self.body_velocity,
        }
    }
}
