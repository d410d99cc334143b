//! Swing-foot trajectory generation.
//!
//! The desired foot path is expressed relative to the desired body position
//! and parametrized by the normalized swing time `s` in [0, 1]. The vertical
//! component is a two-segment cubic Hermite spline: lift-off with a prescribed
//! upward velocity, apex transit with zero vertical rate, touchdown with a
//! prescribed downward velocity. The horizontal component is a single cubic
//! whose endpoint rates cancel the body's forward motion, so the foot is
//! stationary in the world frame at lift-off and touchdown.

use nalgebra::Vector2;

/// Boundary data for the swing trajectory.
///
/// `apex_height` is interpreted in the same frame as the anchor and target
/// passed to [`swing_trajectory`]; the walking controller converts its
/// ground-referenced configuration value into body-relative coordinates
/// before each call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwingParams {
    /// Apex value of the vertical trajectory component [m].
    pub apex_height: f64,
    /// Vertical lift-off velocity, positive up [m/s].
    pub liftoff_velocity: f64,
    /// Vertical touchdown velocity, negative down [m/s].
    pub touchdown_velocity: f64,
    /// Horizontal touchdown offset ahead of the body [m].
    pub step_ahead: f64,
    /// Normalized swing time of the apex, in (0, 1).
    pub apex_phase: f64,
}

impl Default for SwingParams {
    fn default() -> Self {
        Self {
            apex_height: 0.05,
            liftoff_velocity: 0.1,
            touchdown_velocity: -0.1,
            step_ahead: 0.054,
            apex_phase: 0.5,
        }
    }
}

impl SwingParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.apex_height > 0.0) {
            return Err(format!("h_swi must be positive, got {}", self.apex_height));
        }
        if !(self.liftoff_velocity > 0.0) {
            return Err(format!(
                "vy_liftoff must be positive, got {}",
                self.liftoff_velocity
            ));
        }
        if !(self.touchdown_velocity < 0.0) {
            return Err(format!(
                "vy_touchdown must be negative, got {}",
                self.touchdown_velocity
            ));
        }
        if !(self.apex_phase > 0.0 && self.apex_phase < 1.0) {
            return Err(format!(
                "s_apex must lie in (0, 1), got {}",
                self.apex_phase
            ));
        }
        Ok(())
    }
}

/// Cubic Hermite interpolation on a segment of length `h` in the trajectory
/// parameter, with endpoint values `p0`, `p1` and endpoint `d/ds` slopes
/// `m0`, `m1`. Returns the value and `d/ds` at local coordinate `u` in [0, 1].
fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, u: f64, h: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let value = (2.0 * u3 - 3.0 * u2 + 1.0) * p0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * p1
        + (u3 - u2) * h * m1;
    let slope = ((6.0 * u2 - 6.0 * u) * p0
        + (3.0 * u2 - 4.0 * u + 1.0) * h * m0
        + (-6.0 * u2 + 6.0 * u) * p1
        + (3.0 * u2 - 2.0 * u) * h * m1)
        / h;
    (value, slope)
}

/// Evaluate the swing-foot trajectory at normalized swing time `s`.
///
/// `anchor` and `target` are foot positions relative to the desired body;
/// `t_swing` is the wall-clock duration of the swing phase, used to convert
/// between per-second velocities and per-`s` slopes. Returns the desired foot
/// position and velocity in the inertial frame,
/// `x_F = q_B_des + p(s)` and `v_F = v_B_des + p'(s) / t_swing`.
pub fn swing_trajectory(
    sw: &SwingParams,
    anchor: Vector2<f64>,
    target: Vector2<f64>,
    s: f64,
    body_des_pos: Vector2<f64>,
    body_des_vel: Vector2<f64>,
    t_swing: f64,
) -> (Vector2<f64>, Vector2<f64>) {
    let s = s.clamp(0.0, 1.0);

    let (y, dy_ds) = if s <= sw.apex_phase {
        hermite(
            anchor.y,
            sw.liftoff_velocity * t_swing,
            sw.apex_height,
            0.0,
            s / sw.apex_phase,
            sw.apex_phase,
        )
    } else {
        hermite(
            sw.apex_height,
            0.0,
            target.y,
            sw.touchdown_velocity * t_swing,
            (s - sw.apex_phase) / (1.0 - sw.apex_phase),
            1.0 - sw.apex_phase,
        )
    };

    // endpoint slopes cancel the body motion so the foot is world-stationary
    // at lift-off and touchdown
    let m_x = -body_des_vel.x * t_swing;
    let (x, dx_ds) = hermite(anchor.x, m_x, target.x, m_x, s, 1.0);

    let position = body_des_pos + Vector2::new(x, y);
    let velocity = body_des_vel + Vector2::new(dx_ds, dy_ds) / t_swing;
    (position, velocity)
}
