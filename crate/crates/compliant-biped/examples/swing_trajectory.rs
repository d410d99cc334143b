//! Sample one swing-foot trajectory and print it as CSV (body-relative and
//! world coordinates), ready for plotting.
//!
//! ```text
//! cargo run --example swing_trajectory > swing.csv
//! ```

use compliant_biped::control::{swing_trajectory, GaitParams, SwingParams};
use nalgebra::Vector2;

fn main() {
    let gait = GaitParams::default();
    let y_body = 0.62;
    // body-relative boundary data, as the walking controller builds it
    let sw = SwingParams {
        apex_height: 0.05 - y_body,
        ..SwingParams::default()
    };
    let anchor = Vector2::new(-0.054, -0.615);
    let target = Vector2::new(0.054, -0.625);
    let body_vel = Vector2::new(0.15, 0.0);
    let t_swing = gait.swing_duration();

    println!("s,x_rel,y_rel,x_world,y_world,vx_world,vy_world");
    for k in 0..=100 {
        let s = k as f64 / 100.0;
        let body_pos = Vector2::new(body_vel.x * s * t_swing, y_body);
        let (p, v) = swing_trajectory(&sw, anchor, target, s, body_pos, body_vel, t_swing);
        println!(
            "{s:.2},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            p.x - body_pos.x,
            p.y - body_pos.y,
            p.x,
            p.y,
            v.x,
            v.y
        );
    }
}
