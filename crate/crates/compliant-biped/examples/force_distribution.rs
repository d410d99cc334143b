//! Distribute a desired net body force between the legs with the
//! force-distribution QP, and cross-check the active-set solver against the
//! brute-force enumeration oracle.
//!
//! ```text
//! cargo run --example force_distribution
//! ```

use compliant_biped::control::{build_distribution_qp, GaitParams};
use compliant_biped::qp::{brute_force_qp, solve_qp, DEFAULT_MAX_ITER, DEFAULT_TOL};
use nalgebra::Vector2;

fn main() {
    let gait = GaitParams::default();
    let cases = [
        (
            "double support, pure weight",
            Vector2::new(0.0, 107.0),
            [350.0, 350.0],
        ),
        ("right leg in swing", Vector2::new(0.0, 107.0), [350.0, 0.0]),
        (
            "single support with forward demand",
            Vector2::new(100.0, 107.0),
            [350.0, 0.0],
        ),
        (
            "braking in double support",
            Vector2::new(-40.0, 90.0),
            [350.0, 350.0],
        ),
    ];

    for (name, tau, limits) in cases {
        let problem = build_distribution_qp(tau, &gait, limits);
        let sol = solve_qp(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER);
        let oracle = brute_force_qp(&problem);
        println!("{name}: tau = ({:.0}, {:.0}) N", tau.x, tau.y);
        println!(
            "  lambda = (x_L {:7.2}, y_L {:7.2}, x_R {:7.2}, y_R {:7.2}) N   [{:?}]",
            sol.x[0], sol.x[1], sol.x[2], sol.x[3], sol.status
        );
        println!(
            "  oracle agreement: |dx| = {:.2e}, active set {:?}",
            (&sol.x - &oracle.x).norm(),
            sol.active_set
        );
    }
}
