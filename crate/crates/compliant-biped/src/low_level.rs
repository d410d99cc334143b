//! Per-leg low-level controllers producing motor velocity commands.
//!
//! Swing legs run a kinematic position controller: inverse kinematics for the
//! desired joint angles and rates, then a P-law on the angle error. Stance
//! legs run a force controller that inverts the analytic sensitivity of the
//! contact force to joint motion,
//!
//! ```text
//! u = g^-1 (dlambda_des + P_lambda (lambda_des - lambda_meas) - w_B v_body_des)
//! ```
//!
//! which realizes first-order error dynamics on the contact force when the
//! motors track the commanded velocities.

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::model::{
    actuator_jacobian, deflection, elastic_force, rotation_derivative, spring_frame_rotation,
    BodyState, JointState, RobotParams, RobotState, Side,
};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum ControlError {
    #[error("target is outside the leg's reach annulus")]
    Unreachable,
    #[error("kinematics are singular at the requested configuration")]
    Singular,
}

/// Gains and saturation for the per-leg controllers.
#[derive(Debug, Clone, PartialEq)]
pub struct LowLevelGains {
    /// Positive definite gain for swing-phase joint position control [1/s].
    pub p_position: Matrix2<f64>,
    /// Positive definite gain for stance-phase force control [1/s].
    pub p_force: Matrix2<f64>,
    /// Commanded joint velocities are clamped to this magnitude [rad/s].
    pub velocity_limit: f64,
    /// Force control refuses to invert g when |det g| falls below this
    /// [N^2 m / rad^2]; near-singular g would amplify sensor noise.
    pub det_g_min: f64,
}

impl Default for LowLevelGains {
    fn default() -> Self {
        Self {
            p_position: Matrix2::identity() * 10.0,
            p_force: Matrix2::identity() * 2.5,
            velocity_limit: 6.0,
            det_g_min: 1.0,
        }
    }
}

/// Commanded joint velocities (hip, knee) for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorCommand {
    pub velocity: Vector2<f64>,
}

impl MotorCommand {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Componentwise clamp to `limit`.
    pub fn clamped(velocity: Vector2<f64>, limit: f64) -> Self {
        Self {
            velocity: velocity.map(|v| v.clamp(-limit, limit)),
        }
    }
}

/// Solve the two-link inverse kinematics for the joint state that places the
/// undeformed foot at `target_foot` (inertial frame) with velocity
/// `target_foot_vel`, relative to the desired body motion.
///
/// Always selects the knee-back branch (knee angle <= 0 through the working
/// range). The swing controller uses this under the assumption that the spring
/// carries no deflection in the air.
pub fn inverse_kinematics(
    params: &RobotParams,
    target_foot: Vector2<f64>,
    target_foot_vel: Vector2<f64>,
    body_des: &BodyState,
    side: Side,
) -> Result<JointState, ControlError> {
    let p = target_foot - body_des.position - params.hip_offset(side);
    let l1 = params.l_thigh;
    let l2 = params.p_foot_knee.norm();
    let dist = p.norm();
    let slack = 1e-12;
    if dist > l1 + l2 + slack || dist < (l1 - l2).abs() - slack {
        return Err(ControlError::Unreachable);
    }

    // interior angle between the two links; the knee-back branch takes the
    // negative root
    let cos_gamma = ((dist * dist - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let gamma = -cos_gamma.acos();

    let alpha1 = p.y.atan2(p.x) - (l2 * gamma.sin()).atan2(l1 + l2 * cos_gamma);
    let phi2 = params.p_foot_knee.y.atan2(params.p_foot_knee.x);
    let hip = wrap_angle(alpha1 + std::f64::consts::FRAC_PI_2);
    let knee = wrap_angle(gamma - phi2 - std::f64::consts::FRAC_PI_2);

    let mut joints = JointState::new(hip, knee);
    let jac = actuator_jacobian(params, &joints);
    if jac.determinant().abs() < 1e-6 {
        return Err(ControlError::Singular);
    }
    let relative_vel = target_foot_vel - body_des.velocity;
    joints.velocities = jac.try_inverse().ok_or(ControlError::Singular)? * relative_vel;
    Ok(joints)
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w > std::f64::consts::PI {
        w -= two_pi;
    } else if w <= -std::f64::consts::PI {
        w += two_pi;
    }
    w
}

/// Swing-phase P-controller on joint angles with velocity feedforward.
pub fn position_control(
    gains: &LowLevelGains,
    desired: &JointState,
    measured: &JointState,
) -> MotorCommand {
    let u = desired.velocities + gains.p_position * (desired.angles - measured.angles);
    MotorCommand::clamped(u, gains.velocity_limit)
}

/// Contact force at the foot, equal to the elastic force because the leg and
/// foot are massless.
pub fn contact_force_estimate(
    params: &RobotParams,
    state: &RobotState,
    side: Side,
) -> Vector2<f64> {
    elastic_force(params, state, side)
}

/// Analytic sensitivities of the contact force for a non-sliding foot:
/// `g = d(lambda)/d(q_nu)` and `w_B = d(lambda)/d(q_B)`.
///
/// With `M(q_nu) = A K A'` the closed forms are `w_B = -M` and
/// `g = (dM/d(nu)) * deflection - M * J_nu`, where both joint angles turn the
/// spring frame by the same amount, so `dM/d(nu_H) = dM/d(nu_K)`.
pub fn force_sensitivities(
    params: &RobotParams,
    state: &RobotState,
    side: Side,
) -> (Matrix2<f64>, Matrix2<f64>) {
    let joints = state.joint(side);
    let theta = joints.angles.x + joints.angles.y;
    let a = spring_frame_rotation(joints);
    let da = rotation_derivative(theta);
    let k = params.stiffness(side);
    let m = a * k * a.transpose();
    let dm = da * k * a.transpose() + a * k * da.transpose();

    let frame_term = dm * deflection(params, state, side);
    let g =
        Matrix2::from_columns(&[frame_term, frame_term]) - m * actuator_jacobian(params, joints);
    (g, -m)
}

/// Stance-phase force controller. `lambda_meas` is the filtered sensor value,
/// not the model force. Fails when g is too close to singular; the caller
/// freezes the leg and raises a flag.
#[allow(clippy::too_many_arguments)]
pub fn force_control(
    gains: &LowLevelGains,
    params: &RobotParams,
    state: &RobotState,
    lambda_des: Vector2<f64>,
    dlambda_des: Vector2<f64>,
    body_vel_des: Vector2<f64>,
    lambda_meas: Vector2<f64>,
    side: Side,
) -> Result<MotorCommand, ControlError> {
    let (g, w_b) = force_sensitivities(params, state, side);
    if g.determinant().abs() < gains.det_g_min {
        return Err(ControlError::Singular);
    }
    let rhs = dlambda_des + gains.p_force * (lambda_des - lambda_meas) - w_b * body_vel_des;
    let u = g.try_inverse().ok_or(ControlError::Singular)? * rhs;
    Ok(MotorCommand::clamped(u, gains.velocity_limit))
}
