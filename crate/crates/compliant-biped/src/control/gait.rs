//! Gait timing and per-leg contact state machines.
//!
//! The schedule is defined by the stride time, the duty factor `beta` (the
//! stance fraction of a stride) and a relative phase per leg. Three normalized
//! clocks drive everything:
//!
//! ```text
//! s_stride = (t mod T) / T                          in [0, 1)
//! s_leg    = s_stride - theta   (+1 when negative)  in [0, 1)
//! s_swing  = 0                    for s_leg <  beta/2
//!            1                    for s_leg >  1 - beta/2
//!            (s_leg - beta/2) / (1 - beta)  otherwise
//! ```
//!
//! `s_leg = 0` is mid-stance; the scheduled swing window is the open interval
//! between `beta/2` and `1 - beta/2`. Each leg carries an independent two-state
//! machine: the stance-to-swing transition is purely time based (triggered when
//! `s_leg` crosses `beta/2`), while the swing-to-stance transition requires a
//! measured vertical contact force above a threshold, gated to the second half
//! of the swing window so early re-contact cannot re-arm force control.

use nalgebra::Vector2;

use crate::model::Side;

/// Gait schedule and force-distribution parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaitParams {
    /// Stride period [s].
    pub stride_time: f64,
    /// Stance fraction of the stride, in (0, 1).
    pub duty_factor: f64,
    /// Relative phase of each leg, in [0, 1).
    pub phase: [f64; 2],
    /// Measured vertical force that counts as ground contact [N].
    pub lambda_y_min: f64,
    /// Per-leg vertical force limit while in stance [N].
    pub lambda_y_max: [f64; 2],
    /// Friction coefficient of the linearized cone.
    pub friction: f64,
    /// Penalty weight on horizontal force components in the distribution QP.
    pub weight_x: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        Self {
            stride_time: 1.2,
            duty_factor: 0.6,
            phase: [0.0, 0.5],
            lambda_y_min: 5.0,
            lambda_y_max: [350.0, 350.0],
            friction: 0.5,
            weight_x: 1.0,
        }
    }
}

impl GaitParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.stride_time > 0.0) {
            return Err(format!("t_str must be positive, got {}", self.stride_time));
        }
        if !(self.duty_factor > 0.0 && self.duty_factor < 1.0) {
            return Err(format!("beta must lie in (0, 1), got {}", self.duty_factor));
        }
        for (i, th) in self.phase.iter().enumerate() {
            if !(*th >= 0.0 && *th < 1.0) {
                return Err(format!("theta[{i}] must lie in [0, 1), got {th}"));
            }
        }
        if !(self.lambda_y_min > 0.0) {
            return Err(format!(
                "lambda_y_min must be positive, got {}",
                self.lambda_y_min
            ));
        }
        for (i, m) in self.lambda_y_max.iter().enumerate() {
            if !(*m >= 0.0) {
                return Err(format!("lambda_y_max[{i}] must be non-negative, got {m}"));
            }
        }
        if !(self.friction > 0.0) {
            return Err(format!("mu must be positive, got {}", self.friction));
        }
        if !(self.weight_x >= 0.0) {
            return Err(format!("w_x must be non-negative, got {}", self.weight_x));
        }
        Ok(())
    }

    /// Wall-clock duration of one swing phase.
    pub fn swing_duration(&self) -> f64 {
        (1.0 - self.duty_factor) * self.stride_time
    }
}

/// Normalized gait clocks at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaitClock {
    pub s_stride: f64,
    pub s_leg: [f64; 2],
    pub s_swing: [f64; 2],
}

/// Individual leg time: the stride clock shifted by the leg's phase, wrapped
/// into [0, 1).
pub fn leg_time(s_stride: f64, theta: f64) -> f64 {
    let s = s_stride - theta;
    if s >= 0.0 {
        s
    } else {
        s + 1.0
    }
}

/// Normalized swing time: 0 through scheduled stance, ramps over the swing
/// window, saturates at 1 afterwards.
pub fn swing_time(s_leg: f64, duty_factor: f64) -> f64 {
    if s_leg < duty_factor / 2.0 {
        0.0
    } else if s_leg > 1.0 - duty_factor / 2.0 {
        1.0
    } else {
        (s_leg - duty_factor / 2.0) / (1.0 - duty_factor)
    }
}

/// Evaluate all gait clocks at time `t >= 0`.
pub fn gait_clock(gait: &GaitParams, t: f64) -> GaitClock {
    let s_stride = (t % gait.stride_time) / gait.stride_time;
    let s_leg = [
        leg_time(s_stride, gait.phase[0]),
        leg_time(s_stride, gait.phase[1]),
    ];
    GaitClock {
        s_stride,
        s_leg,
        s_swing: [
            swing_time(s_leg[0], gait.duty_factor),
            swing_time(s_leg[1], gait.duty_factor),
        ],
    }
}

/// Contact-phase transition of one leg within one controller tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegEvent {
    None,
    Liftoff,
    Touchdown,
}

/// Per-leg contact flags, the latest clock, and the swing-trajectory
/// boundary data captured at lift-off (positions relative to the swing
/// frame the controller carries with the body). The gait starts with both
/// legs in stance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitState {
    /// Contact phase per leg: `true` = stance, `false` = swing.
    pub contact: [bool; 2],
    pub clock: GaitClock,
    /// Foot position relative to the swing frame, captured at lift-off.
    pub anchor: [Vector2<f64>; 2],
    /// Touchdown target relative to the swing frame, fixed at lift-off.
    pub target: [Vector2<f64>; 2],
    /// World position of the swing frame at lift-off.
    pub swing_origin: [Vector2<f64>; 2],
    /// Time of the last lift-off, for extrapolating the swing frame.
    pub liftoff_time: [f64; 2],
}

impl GaitState {
    pub fn init(gait: &GaitParams) -> Self {
        Self {
            contact: [true, true],
            clock: gait_clock(gait, 0.0),
            anchor: [Vector2::zeros(); 2],
            target: [Vector2::zeros(); 2],
            swing_origin: [Vector2::zeros(); 2],
            liftoff_time: [0.0; 2],
        }
    }
}

/// Did `s_leg` pass `threshold` moving forward from `prev` to `cur`,
/// accounting for the wrap at 1?
fn crossed(prev: f64, cur: f64, threshold: f64) -> bool {
    if cur >= prev {
        prev < threshold && threshold <= cur
    } else {
        prev < threshold || threshold <= cur
    }
}

/// Advance both leg state machines by one controller tick.
///
/// `foot_rel` are the current foot positions relative to the swing frame
/// (captured as swing anchors at lift-off), `touchdown_target` is the target
/// in the same frame, and `swing_frame` is the frame's current world
/// position, stored at lift-off so the whole step is planned once.
#[allow(clippy::too_many_arguments)]
pub fn update_contact_state(
    gait: &GaitParams,
    state: &GaitState,
    clock: GaitClock,
    t: f64,
    lambda_meas: &[Vector2<f64>; 2],
    foot_rel: &[Vector2<f64>; 2],
    touchdown_target: Vector2<f64>,
    swing_frame: Vector2<f64>,
) -> (GaitState, [LegEvent; 2]) {
    let mut next = state.clone();
    let mut events = [LegEvent::None; 2];
    let liftoff_at = gait.duty_factor / 2.0;

    for side in Side::BOTH {
        let i = side.idx();
        if state.contact[i] {
            if crossed(state.clock.s_leg[i], clock.s_leg[i], liftoff_at) {
                next.contact[i] = false;
                next.anchor[i] = foot_rel[i];
                next.target[i] = touchdown_target;
                next.swing_origin[i] = swing_frame;
                next.liftoff_time[i] = t;
                events[i] = LegEvent::Liftoff;
            }
        } else if lambda_meas[i].y > gait.lambda_y_min && clock.s_swing[i] > 0.5 {
            next.contact[i] = true;
            events[i] = LegEvent::Touchdown;
        }
    }
    next.clock = clock;
    (next, events)
}
