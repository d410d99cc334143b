//! Print the gait clocks over one stride: the normalized stride time, the
//! per-leg times and the swing ramps that drive the two state machines.
//!
//! ```text
//! cargo run --example gait_timing
//! ```

use compliant_biped::control::{gait_clock, GaitParams};

fn main() {
    let gait = GaitParams::default();
    println!(
        "stride {} s, duty factor {}, phases ({}, {})",
        gait.stride_time, gait.duty_factor, gait.phase[0], gait.phase[1]
    );
    println!("lift-off when s_leg crosses {}", gait.duty_factor / 2.0);
    println!();
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>9} {:>9}  schedule",
        "t", "s_str", "s_L", "s_R", "swing_L", "swing_R"
    );

    let steps = 24;
    for k in 0..=steps {
        let t = gait.stride_time * k as f64 / steps as f64;
        let c = gait_clock(&gait, t);
        let phase = |s: f64| {
            if s == 0.0 {
                "stance"
            } else if s >= 1.0 {
                "late"
            } else {
                "swing"
            }
        };
        println!(
            "{t:6.3} {:8.3} {:8.3} {:8.3} {:9.3} {:9.3}  L:{:<6} R:{}",
            c.s_stride,
            c.s_leg[0],
            c.s_leg[1],
            c.s_swing[0],
            c.s_swing[1],
            phase(c.s_swing[0]),
            phase(c.s_swing[1]),
        );
    }
}
