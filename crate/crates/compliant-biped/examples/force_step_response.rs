//! Step response of the stance-phase force controller on a frozen body with
//! ideal velocity tracking. With the default force gain (2.5/s) the error
//! decays with a 0.4 s time constant, so the ratio at t = 0.4 s is e^-1.
//!
//! ```text
//! cargo run --release --example force_step_response
//! ```

use compliant_biped::low_level::{contact_force_estimate, force_control, LowLevelGains};
use compliant_biped::model::{
    nominal_foot_position, BodyState, FootState, JointState, RobotParams, RobotState, Side,
};
use nalgebra::Vector2;

fn main() {
    let gains = LowLevelGains {
        velocity_limit: 50.0,
        ..LowLevelGains::default()
    };
    let params = RobotParams::default();
    let body = BodyState::at(0.0, 0.6);
    let joints = JointState::new(0.3, -0.8);
    let mut state = RobotState {
        body,
        joints: [joints; 2],
        ..Default::default()
    };
    for side in Side::BOTH {
        state.feet[side.idx()] = FootState {
            position: nominal_foot_position(&params, &body, &joints, side),
            pinned: true,
        };
    }

    let lambda0 = contact_force_estimate(&params, &state, Side::Left);
    let step = Vector2::new(5.0, 30.0);
    let lambda_des = lambda0 + step;
    let e0 = step.norm();
    println!("force step of {:.1} N, error ratio e(t)/e(0):", e0);

    let dt = 1e-4;
    for k in 0..=(0.8 / dt) as usize {
        let lambda = contact_force_estimate(&params, &state, Side::Left);
        if k % 1000 == 0 {
            let t = k as f64 * dt;
            let ratio = (lambda_des - lambda).norm() / e0;
            println!(
                "  t = {t:.1} s   ratio = {ratio:.4}   (exp(-t/0.4) = {:.4})",
                (-t / 0.4).exp()
            );
        }
        let u = force_control(
            &gains,
            &params,
            &state,
            lambda_des,
            Vector2::zeros(),
            Vector2::zeros(),
            lambda,
            Side::Left,
        )
        .expect("non-singular configuration");
        let j = state.joint_mut(Side::Left);
        j.velocities = u.velocity;
        j.angles += dt * u.velocity;
    }
}
