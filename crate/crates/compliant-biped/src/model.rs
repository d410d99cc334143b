//! Robot parameters, state types, leg kinematics and the linear elastic leg model.
//!
//! The robot is a planar (sagittal) biped: a point-mass main body, two legs with
//! actuated hip and knee joints, and massless elastic lower legs. Each lower leg
//! acts as a two-dimensional linear spring whose stiffness is constant in a
//! knee-fixed "spring" frame. The foot contact point is an independent coordinate,
//! so the ten generalized coordinates are
//!
//! ```text
//! q = [x_B, y_B, nu_H_L, nu_K_L, nu_H_R, nu_K_R, x_F_L, y_F_L, x_F_R, y_F_R]
//! ```
//!
//! Angle convention: `nu_H = nu_K = 0` points the thigh and the spring frame
//! straight down; positive angles rotate counterclockwise (+x forward, +y up).

use nalgebra::{Matrix2, SMatrix, SVector, Vector2};
use thiserror::Error;

/// Jacobian of one leg's spring deflection w.r.t. all ten generalized coordinates.
pub type DeflectionJacobian = SMatrix<f64, 2, 10>;

/// Forces conjugate to the ten generalized coordinates.
pub type GeneralizedForces = SVector<f64, 10>;

/// Leg identifier. Also used to index per-leg arrays via [`Side::idx`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    #[inline]
    pub fn idx(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{side:?} stiffness matrix must be symmetric positive definite")]
    StiffnessNotPositiveDefinite { side: Side },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("joint limit range for {name} is empty: [{lo}, {hi}]")]
    EmptyJointRange {
        name: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("kinematic reach {reach:.3} m does not exceed desired body height {height:.3} m")]
    InsufficientReach { reach: f64, height: f64 },
}

/// Physical parameters of the robot: geometry, masses and per-leg stiffness.
///
/// Lengths are in meters, masses in kilograms, stiffnesses in N/m.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotParams {
    /// Length of the rigid segment from hip axis to knee axis.
    pub l_thigh: f64,
    /// Undeformed foot position expressed in the knee-fixed spring frame.
    pub p_foot_knee: Vector2<f64>,
    /// Left-leg stiffness matrix, constant in the spring frame.
    pub stiffness_left: Matrix2<f64>,
    /// Right-leg stiffness matrix, constant in the spring frame.
    pub stiffness_right: Matrix2<f64>,
    /// Main-body mass.
    pub m_body: f64,
    /// Gravitational acceleration (positive down).
    pub gravity: f64,
    /// Hip axis position relative to the body reference point, left leg.
    pub hip_offset_left: Vector2<f64>,
    /// Hip axis position relative to the body reference point, right leg.
    pub hip_offset_right: Vector2<f64>,
    /// Allowed hip angle range [rad].
    pub hip_range: (f64, f64),
    /// Allowed knee angle range [rad]; knee-back bending is negative.
    pub knee_range: (f64, f64),
}

impl Default for RobotParams {
    fn default() -> Self {
        // The foot offset orients the spring frame vertically in the nominal
        // stance posture; a tilted frame would couple every vertical load
        // transfer into horizontal force faster than the force loop can
        // reject. Shear stiffness is well below the axial value, as for a
        // slender leaf spring; the sag under half body weight stays ~6.8 mm.
        let stiffness = Matrix2::new(1600.0, 500.0, 500.0, 8000.0);
        Self {
            l_thigh: 0.35,
            p_foot_knee: Vector2::new(-0.1034, -0.2856),
            stiffness_left: stiffness,
            stiffness_right: stiffness,
            m_body: 9.0,
            gravity: 9.81,
            hip_offset_left: Vector2::zeros(),
            hip_offset_right: Vector2::zeros(),
            hip_range: (-1.5, 1.5),
            knee_range: (-2.5, 0.2),
        }
    }
}

impl RobotParams {
    pub fn stiffness(&self, side: Side) -> &Matrix2<f64> {
        match side {
            Side::Left => &self.stiffness_left,
            Side::Right => &self.stiffness_right,
        }
    }

    pub fn hip_offset(&self, side: Side) -> Vector2<f64> {
        match side {
            Side::Left => self.hip_offset_left,
            Side::Right => self.hip_offset_right,
        }
    }

    /// Distance from hip to foot with the leg fully stretched.
    pub fn max_reach(&self) -> f64 {
        self.l_thigh + self.p_foot_knee.norm()
    }

    /// Smallest hip-to-foot distance the two-link chain can realize.
    pub fn min_reach(&self) -> f64 {
        (self.l_thigh - self.p_foot_knee.norm()).abs()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for side in Side::BOTH {
            let k = self.stiffness(side);
            let symmetric = (k[(0, 1)] - k[(1, 0)]).abs() <= 1e-9 * (1.0 + k.abs().max());
            // a symmetric 2x2 is positive definite iff k_xx > 0 and det > 0
            if !symmetric || k[(0, 0)] <= 0.0 || k.determinant() <= 0.0 {
                return Err(ModelError::StiffnessNotPositiveDefinite { side });
            }
        }
        for (name, value) in [
            ("l_thigh", self.l_thigh),
            ("m_body", self.m_body),
            ("gravity", self.gravity),
        ] {
            if !(value > 0.0) {
                return Err(ModelError::NonPositive { name, value });
            }
        }
        for (name, (lo, hi)) in [("hip", self.hip_range), ("knee", self.knee_range)] {
            if !(lo < hi) {
                return Err(ModelError::EmptyJointRange { name, lo, hi });
            }
        }
        Ok(())
    }

    /// The stretched leg must be longer than the commanded body height,
    /// otherwise the feet cannot reach the ground.
    pub fn check_reach(&self, body_height: f64) -> Result<(), ModelError> {
        let reach = self.max_reach();
        if reach <= body_height {
            return Err(ModelError::InsufficientReach {
                reach,
                height: body_height,
            });
        }
        Ok(())
    }

    pub fn joints_within_limits(&self, joints: &JointState) -> bool {
        let (hl, hh) = self.hip_range;
        let (kl, kh) = self.knee_range;
        joints.angles.x >= hl
            && joints.angles.x <= hh
            && joints.angles.y >= kl
            && joints.angles.y <= kh
    }
}

/// Main-body position and velocity in the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
}

impl BodyState {
    pub fn new(position: Vector2<f64>, velocity: Vector2<f64>) -> Self {
        Self { position, velocity }
    }

    pub fn at(x: f64, y: f64) -> Self {
        Self {
            position: Vector2::new(x, y),
            velocity: Vector2::zeros(),
        }
    }
}

/// Hip and knee angle (`angles.x`, `angles.y`) and angular rates of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub angles: Vector2<f64>,
    pub velocities: Vector2<f64>,
}

impl JointState {
    pub fn new(hip: f64, knee: f64) -> Self {
        Self {
            angles: Vector2::new(hip, knee),
            velocities: Vector2::zeros(),
        }
    }
}

/// Foot contact point of one leg. While `pinned`, the point is held fixed by
/// the ground (non-sliding contact); otherwise it rides along at the nominal,
/// undeformed position.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FootState {
    pub position: Vector2<f64>,
    pub pinned: bool,
}

/// Full robot state: body, per-leg joints, per-leg feet.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RobotState {
    pub body: BodyState,
    pub joints: [JointState; 2],
    pub feet: [FootState; 2],
}

impl RobotState {
    pub fn joint(&self, side: Side) -> &JointState {
        &self.joints[side.idx()]
    }

    pub fn joint_mut(&mut self, side: Side) -> &mut JointState {
        &mut self.joints[side.idx()]
    }

    pub fn foot(&self, side: Side) -> &FootState {
        &self.feet[side.idx()]
    }

    pub fn foot_mut(&mut self, side: Side) -> &mut FootState {
        &mut self.feet[side.idx()]
    }

    pub fn all_finite(&self) -> bool {
        let mut ok = self.body.position.iter().all(|v| v.is_finite())
            && self.body.velocity.iter().all(|v| v.is_finite());
        for i in 0..2 {
            ok &= self.joints[i].angles.iter().all(|v| v.is_finite())
                && self.joints[i].velocities.iter().all(|v| v.is_finite())
                && self.feet[i].position.iter().all(|v| v.is_finite());
        }
        ok
    }

    /// Largest absolute value over all state entries, for blow-up detection.
    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for v in [&self.body.position, &self.body.velocity] {
            m = m.max(v.abs().max());
        }
        for i in 0..2 {
            m = m.max(self.joints[i].angles.abs().max());
            m = m.max(self.joints[i].velocities.abs().max());
            m = m.max(self.feet[i].position.abs().max());
        }
        m
    }
}

#[inline]
pub(crate) fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// d/d(theta) of [`rotation`].
#[inline]
pub(crate) fn rotation_derivative(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(-s, -c, c, -s)
}

/// Rotation from the knee-fixed spring frame into the inertial frame.
///
/// The spring frame tilts with both joints (body pitch is mechanically blocked),
/// so its orientation angle is `nu_H + nu_K`.
pub fn spring_frame_rotation(joints: &JointState) -> Matrix2<f64> {
    rotation(joints.angles.x + joints.angles.y)
}

/// Hip-to-foot vector of the undeformed leg, as a function of the joint angles:
/// the thigh link rotated by `nu_H` plus the spring-frame foot offset rotated
/// by `nu_H + nu_K`.
pub fn leg_kinematics(params: &RobotParams, joints: &JointState) -> Vector2<f64> {
    let thigh = rotation(joints.angles.x) * Vector2::new(0.0, -params.l_thigh);
    let shank = spring_frame_rotation(joints) * params.p_foot_knee;
    thigh + shank
}

/// Where the foot would be with an undeformed elastic element.
pub fn nominal_foot_position(
    params: &RobotParams,
    body: &BodyState,
    joints: &JointState,
    side: Side,
) -> Vector2<f64> {
    body.position + params.hip_offset(side) + leg_kinematics(params, joints)
}

/// Analytic Jacobian of [`leg_kinematics`] w.r.t. the joint angles.
pub fn actuator_jacobian(params: &RobotParams, joints: &JointState) -> Matrix2<f64> {
    let theta = joints.angles.x + joints.angles.y;
    let d_thigh = rotation_derivative(joints.angles.x) * Vector2::new(0.0, -params.l_thigh);
    let d_shank = rotation_derivative(theta) * params.p_foot_knee;
    Matrix2::from_columns(&[d_thigh + d_shank, d_shank])
}

/// Deflection of the elastic element: actual foot position minus nominal.
pub fn deflection(params: &RobotParams, state: &RobotState, side: Side) -> Vector2<f64> {
    state.foot(side).position - nominal_foot_position(params, &state.body, state.joint(side), side)
}

/// Elastic restoring force of one leg in inertial coordinates,
///
/// ```text
/// f = A_IK * K * A_KI * (x_F - x_F_nominal)
/// ```
///
/// With the sign convention used throughout: `f` is the ground reaction force
/// acting on the foot, which a stance leg transmits unchanged to the main body.
pub fn elastic_force(params: &RobotParams, state: &RobotState, side: Side) -> Vector2<f64> {
    let a = spring_frame_rotation(state.joint(side));
    a * params.stiffness(side) * a.transpose() * deflection(params, state, side)
}

/// Jacobian of one leg's deflection w.r.t. all ten generalized coordinates.
///
/// Block layout (2x2 blocks): body, left joints, right joints, left foot,
/// right foot. The body block is `-I`, the leg's own joint block is `-J_nu`,
/// its own foot block `+I`, everything else zero.
pub fn full_jacobian(params: &RobotParams, joints: &JointState, side: Side) -> DeflectionJacobian {
    let mut j = DeflectionJacobian::zeros();
    j.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&(-Matrix2::identity()));
    let joint_col = 2 + 2 * side.idx();
    j.fixed_view_mut::<2, 2>(0, joint_col)
        .copy_from(&(-actuator_jacobian(params, joints)));
    let foot_col = 6 + 2 * side.idx();
    j.fixed_view_mut::<2, 2>(0, foot_col)
        .copy_from(&Matrix2::identity());
    j
}

/// Elastic forces of both legs projected into the generalized coordinates,
/// `J_L^T f_L + J_R^T f_R`.
pub fn generalized_elastic_forces(params: &RobotParams, state: &RobotState) -> GeneralizedForces {
    let mut tau = GeneralizedForces::zeros();
    for side in Side::BOTH {
        let f = elastic_force(params, state, side);
        let j = full_jacobian(params, state.joint(side), side);
        tau += j.transpose() * f;
    }
    tau
}
