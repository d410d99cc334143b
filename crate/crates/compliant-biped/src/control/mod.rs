//! High-level walking control: body posture control, force distribution,
//! swing trajectories, gait scheduling and the per-tick dispatch.
//!
//! [`WalkController`] implements the controller executed once per control
//! period: update the gait state machines, distribute the virtual-model force
//! demand over the stance legs, then run force control on stance legs and the
//! swing trajectory / inverse kinematics / position control chain on swing
//! legs.

pub mod gait;
pub mod swing;
pub mod vmc;

use nalgebra::{Vector2, Vector4};

use crate::low_level::{
    force_control, inverse_kinematics, position_control, ControlError, LowLevelGains, MotorCommand,
};
use crate::model::{
    nominal_foot_position, spring_frame_rotation, BodyState, FootState, RobotParams, RobotState,
    Side,
};
use crate::plant::SensorReading;
use crate::qp::{ActiveSetSolver, QpStatus};

pub use gait::{gait_clock, update_contact_state, GaitClock, GaitParams, GaitState, LegEvent};
pub use swing::{swing_trajectory, SwingParams};
pub use vmc::{
    body_reference, build_distribution_qp, distribute_forces, vmc_force, DesiredForces, VmcGains,
};

/// Anything that produces motor commands from sensor readings once per tick.
pub trait Controller {
    fn control(&mut self, t: f64, sensors: &SensorReading) -> ControlOutput;
}

/// Per-tick controller faults and solver status.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub qp_status: QpStatus,
    /// Force control (or swing IK) hit a singular configuration.
    pub singular: [bool; 2],
    /// Swing target left the reachable annulus.
    pub unreachable: [bool; 2],
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            qp_status: QpStatus::Optimal,
            singular: [false; 2],
            unreachable: [false; 2],
        }
    }
}

/// Everything the controller hands back to the simulation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlOutput {
    pub commands: [MotorCommand; 2],
    pub desired: DesiredForces,
    /// Body reference (position, velocity) used this tick.
    pub body_ref: (Vector2<f64>, Vector2<f64>),
    /// Contact flags after the state-machine update: `true` = stance.
    pub contact: [bool; 2],
    /// Normalized swing time per leg.
    pub s_swing: [f64; 2],
    pub diagnostics: Diagnostics,
}

impl Default for ControlOutput {
    fn default() -> Self {
        Self {
            commands: [MotorCommand::zero(); 2],
            desired: DesiredForces::default(),
            body_ref: (Vector2::zeros(), Vector2::zeros()),
            contact: [true; 2],
            s_swing: [0.0; 2],
            diagnostics: Diagnostics::default(),
        }
    }
}

/// Reference setpoint and miscellaneous controller constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setpoint {
    /// Desired forward velocity [m/s].
    pub v_body: f64,
    /// Desired body height [m].
    pub y_body: f64,
    /// Body x at gait start; the reference ramps from here.
    pub x0: f64,
    /// Ground height assumed by the controller [m].
    pub ground_height: f64,
    /// Swing targets aim this far below the ground so the contact-force
    /// threshold reliably trips at touchdown [m].
    pub touchdown_penetration: f64,
    /// Low-pass cutoff for the desired-force rate estimate [Hz].
    pub dlambda_cutoff: f64,
}

impl Default for Setpoint {
    fn default() -> Self {
        Self {
            v_body: 0.15,
            y_body: 0.62,
            x0: 0.0,
            ground_height: 0.0,
            touchdown_penetration: 0.005,
            dlambda_cutoff: 50.0,
        }
    }
}

/// Backward difference of the desired forces, low-pass filtered. The QP output
/// jumps at support transitions; differencing it raw would hand the force
/// controller unbounded feedforward rates.
#[derive(Debug, Clone, PartialEq)]
struct ForceRateFilter {
    prev: Vector4<f64>,
    rate: Vector4<f64>,
    primed: bool,
    cutoff: f64,
}

impl ForceRateFilter {
    fn new(cutoff: f64) -> Self {
        Self {
            prev: Vector4::zeros(),
            rate: Vector4::zeros(),
            primed: false,
            cutoff,
        }
    }

    /// On touchdown the leg's filter restarts from the measured force, so the
    /// stance entry does not difference across the whole swing phase.
    fn reset_leg(&mut self, leg: usize, measured: Vector2<f64>) {
        self.prev[2 * leg] = measured.x;
        self.prev[2 * leg + 1] = measured.y;
        self.rate[2 * leg] = 0.0;
        self.rate[2 * leg + 1] = 0.0;
    }

    fn update(&mut self, lambda: Vector4<f64>, dt: f64) -> Vector4<f64> {
        if !self.primed {
            self.prev = lambda;
            self.primed = true;
        }
        let raw = (lambda - self.prev) / dt;
        let alpha = 1.0 - (-dt * 2.0 * std::f64::consts::PI * self.cutoff).exp();
        self.rate += alpha * (raw - self.rate);
        self.prev = lambda;
        self.rate
    }
}

/// The complete walking controller. Owns the gait state machines, the
/// desired-force rate filter and the warm-started QP solver; everything else
/// is pure. One instance drives one robot.
#[derive(Debug, Clone)]
pub struct WalkController {
    params: RobotParams,
    vmc: VmcGains,
    gains: LowLevelGains,
    gait_params: GaitParams,
    swing: SwingParams,
    setpoint: Setpoint,
    dt: f64,
    gait: GaitState,
    rate_filter: ForceRateFilter,
    solver: ActiveSetSolver,
    /// Stride-averaged deviation of the measured body x from the reference.
    /// Foot placement keys off this instead of the raw measurement: the body
    /// rocks fore-aft at the support-transition frequency, and placing feet
    /// at the phase-locked lift-off samples of that rock ratchets the robot
    /// forward. One-stride averaging decorrelates placement from the rock.
    x_dev_filter: Option<f64>,
}

impl WalkController {
    pub fn new(
        params: RobotParams,
        vmc: VmcGains,
        gains: LowLevelGains,
        gait_params: GaitParams,
        swing: SwingParams,
        setpoint: Setpoint,
        dt_control: f64,
    ) -> Self {
        let gait = GaitState::init(&gait_params);
        let rate_filter = ForceRateFilter::new(setpoint.dlambda_cutoff);
        Self {
            params,
            vmc,
            gains,
            gait_params,
            swing,
            setpoint,
            dt: dt_control,
            gait,
            rate_filter,
            solver: ActiveSetSolver::new(),
            x_dev_filter: None,
        }
    }

    pub fn gait_state(&self) -> &GaitState {
        &self.gait
    }

    /// Reconstruct the robot state the controller reasons about. Joints and
    /// body come from the sensors; feet are not sensed directly, so stance
    /// feet are placed at the nominal position plus the deflection implied by
    /// the measured force, and swing feet at the nominal position.
    fn estimate_state(&self, sensors: &SensorReading) -> RobotState {
        let body = BodyState::new(sensors.body_position, sensors.body_velocity);
        let mut est = RobotState {
            body,
            joints: sensors.joints,
            ..Default::default()
        };
        for side in Side::BOTH {
            let i = side.idx();
            let nominal = nominal_foot_position(&self.params, &body, &sensors.joints[i], side);
            est.feet[i] = if self.gait.contact[i] {
                let a = spring_frame_rotation(&sensors.joints[i]);
                let stiffness_inertial = a * self.params.stiffness(side) * a.transpose();
                let delta = stiffness_inertial
                    .try_inverse()
                    .map(|inv| inv * sensors.lambda_filtered[i])
                    .unwrap_or_else(Vector2::zeros);
                FootState {
                    position: nominal + delta,
                    pinned: true,
                }
            } else {
                FootState {
                    position: nominal,
                    pinned: false,
                }
            };
        }
        est
    }

    /// One controller execution: gait update, force distribution, per-leg
    /// dispatch (force control in stance, trajectory tracking in swing).
    /// Faulted legs freeze at zero command and raise a diagnostic flag.
    pub fn step(&mut self, t: f64, sensors: &SensorReading) -> ControlOutput {
        let (ref_pos, ref_vel) = body_reference(
            self.setpoint.v_body,
            self.setpoint.y_body,
            self.setpoint.x0,
            t,
        );
        let clock = gait_clock(&self.gait_params, t);

        // Swing steps are planned once, at lift-off: the swing frame anchors
        // horizontally to the stride-averaged body position (feet land a
        // fixed offset ahead of the actual hip, so tracking error cannot skew
        // foot placement, and the stride-locked fore-aft rock cannot ratchet
        // the placement forward) and vertically to the constant desired
        // height (the world touchdown depth stays deterministic instead of
        // inheriting body bounce). For the rest of the swing the frame
        // advances at the reference velocity. Anchors are the *nominal*
        // (zero-deflection) foot positions: the swing controller reasons in
        // kinematic coordinates, and anchoring at the deflected foot would
        // command a dip into the ground before the leg lifts.
        let x_dev = sensors.body_position.x - ref_pos.x;
        let x_dev_avg = match &mut self.x_dev_filter {
            Some(state) => {
                let tau = self.gait_params.stride_time;
                *state += (self.dt / tau) * (x_dev - *state);
                *state
            }
            None => *self.x_dev_filter.insert(x_dev),
        };
        let swing_frame = Vector2::new(ref_pos.x + x_dev_avg, self.setpoint.y_body);
        let body_meas = BodyState::new(sensors.body_position, sensors.body_velocity);
        let foot_rel = [
            nominal_foot_position(&self.params, &body_meas, &sensors.joints[0], Side::Left)
                - swing_frame,
            nominal_foot_position(&self.params, &body_meas, &sensors.joints[1], Side::Right)
                - swing_frame,
        ];
        let touchdown_target = Vector2::new(
            self.swing.step_ahead,
            self.setpoint.ground_height
                - self.setpoint.touchdown_penetration
                - self.setpoint.y_body,
        );
        let (gait_next, events) = update_contact_state(
            &self.gait_params,
            &self.gait,
            clock,
            t,
            &sensors.lambda_filtered,
            &foot_rel,
            touchdown_target,
            swing_frame,
        );
        self.gait = gait_next;
        for side in Side::BOTH {
            if events[side.idx()] == LegEvent::Touchdown {
                self.rate_filter
                    .reset_leg(side.idx(), sensors.lambda_filtered[side.idx()]);
            }
        }

        // estimate after the state-machine update so a leg entering stance
        // gets its force-implied foot deflection from the first tick
        let est = self.estimate_state(sensors);
        let body_est = body_meas;
        let tau = vmc_force(
            &self.vmc,
            self.params.m_body,
            self.params.gravity,
            ref_pos,
            ref_vel,
            &body_est,
        );
        let limits = [
            if self.gait.contact[0] {
                self.gait_params.lambda_y_max[0]
            } else {
                0.0
            },
            if self.gait.contact[1] {
                self.gait_params.lambda_y_max[1]
            } else {
                0.0
            },
        ];
        let (lambda, qp_status) =
            distribute_forces(tau, &self.gait_params, limits, &mut self.solver);
        let dlambda = self.rate_filter.update(lambda, self.dt);
        let desired = DesiredForces { lambda, dlambda };

        let mut commands = [MotorCommand::zero(); 2];
        let mut diagnostics = Diagnostics {
            qp_status,
            ..Diagnostics::default()
        };

        for side in Side::BOTH {
            let i = side.idx();
            if self.gait.contact[i] {
                let (lambda_des, dlambda_des) = desired.leg(side);
                match force_control(
                    &self.gains,
                    &self.params,
                    &est,
                    lambda_des,
                    dlambda_des,
                    ref_vel,
                    sensors.lambda_filtered[i],
                    side,
                ) {
                    Ok(cmd) => commands[i] = cmd,
                    Err(_) => diagnostics.singular[i] = true,
                }
            } else {
                // the trajectory works in body-relative coordinates: convert
                // the ground-referenced apex height once per call
                let profile = SwingParams {
                    apex_height: self.setpoint.ground_height + self.swing.apex_height
                        - self.setpoint.y_body,
                    ..self.swing
                };
                let frame = self.gait.swing_origin[i] + ref_vel * (t - self.gait.liftoff_time[i]);
                let (foot_des, foot_vel_des) = swing_trajectory(
                    &profile,
                    self.gait.anchor[i],
                    self.gait.target[i],
                    clock.s_swing[i],
                    frame,
                    ref_vel,
                    self.gait_params.swing_duration(),
                );
                // the joints tie the foot to the *actual* body: solve the
                // kinematics against the measured position (with the
                // reference velocity as feedforward) so the foot really
                // lands on the world-frame target
                let body_des = BodyState::new(sensors.body_position, ref_vel);
                match inverse_kinematics(&self.params, foot_des, foot_vel_des, &body_des, side) {
                    Ok(joints_des) => {
                        commands[i] = position_control(&self.gains, &joints_des, &sensors.joints[i])
                    }
                    Err(ControlError::Unreachable) => diagnostics.unreachable[i] = true,
                    Err(ControlError::Singular) => diagnostics.singular[i] = true,
                }
            }
        }

        ControlOutput {
            commands,
            desired,
            body_ref: (ref_pos, ref_vel),
            contact: self.gait.contact,
            s_swing: clock.s_swing,
            diagnostics,
        }
    }
}

impl Controller for WalkController {
    fn control(&mut self, t: f64, sensors: &SensorReading) -> ControlOutput {
        self.step(t, sensors)
    }
}
