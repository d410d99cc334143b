//! Virtual model control of the main body and contact-force distribution.
//!
//! PD laws (virtual springs and dampers) plus gravity compensation turn body
//! tracking errors into a desired net force. A small QP splits that force
//! between the stance legs while penalizing horizontal components and keeping
//! each leg inside its friction cone and vertical force bounds.

use nalgebra::{DMatrix, DVector, Vector2, Vector4};

use crate::control::gait::GaitParams;
use crate::model::{BodyState, Side};
use crate::qp::{ActiveSetSolver, QpProblem, QpStatus, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Virtual spring (p) and damper (d) gains of the body controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmcGains {
    pub p_x: f64,
    pub d_x: f64,
    pub p_y: f64,
    pub d_y: f64,
}

impl Default for VmcGains {
    fn default() -> Self {
        Self {
            p_x: 300.0,
            d_x: 34.6,
            p_y: 2000.0,
            d_y: 89.4,
        }
    }
}

impl VmcGains {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("p_x", self.p_x),
            ("d_x", self.d_x),
            ("p_y", self.p_y),
            ("d_y", self.d_y),
        ] {
            if !(v >= 0.0) {
                return Err(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

/// Desired ground reaction forces for both legs, ordered
/// `(x_L, y_L, x_R, y_R)`, with their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DesiredForces {
    pub lambda: Vector4<f64>,
    pub dlambda: Vector4<f64>,
}

impl DesiredForces {
    pub fn leg(&self, side: Side) -> (Vector2<f64>, Vector2<f64>) {
        let i = 2 * side.idx();
        (
            Vector2::new(self.lambda[i], self.lambda[i + 1]),
            Vector2::new(self.dlambda[i], self.dlambda[i + 1]),
        )
    }
}

/// Reference trajectory of the main body: constant forward velocity at a
/// constant height, starting from `x0`.
pub fn body_reference(v_des: f64, y_des: f64, x0: f64, t: f64) -> (Vector2<f64>, Vector2<f64>) {
    (
        Vector2::new(x0 + v_des * t, y_des),
        Vector2::new(v_des, 0.0),
    )
}

/// Desired net force on the main body from the virtual spring-damper laws.
/// The vertical channel adds `m g` for gravity compensation.
pub fn vmc_force(
    gains: &VmcGains,
    m_body: f64,
    gravity: f64,
    ref_pos: Vector2<f64>,
    ref_vel: Vector2<f64>,
    body: &BodyState,
) -> Vector2<f64> {
    let e = ref_pos - body.position;
    let de = ref_vel - body.velocity;
    Vector2::new(
        gains.p_x * e.x + gains.d_x * de.x,
        gains.p_y * e.y + gains.d_y * de.y + m_body * gravity,
    )
}

/// Build the force-distribution QP
///
/// ```text
/// minimize 1/2 |A lambda - b|^2,  A = [1 0 1 0; 0 1 0 1; w_x 0 0 0; 0 0 w_x 0],
///                                 b = [tau_x, tau_y, 0, 0]
/// ```
///
/// in standard form `H = A'A`, `c = -A'b`, subject to the friction cone rows
/// `+-mu lambda_x - lambda_y <= 0` per leg and `lambda_y <= lambda_y_max`.
/// The cone rows jointly imply `lambda_y >= 0`, so no separate nonnegativity
/// rows are needed. A swing leg is passed with `lambda_y_max = 0`.
pub fn build_distribution_qp(
    tau_des: Vector2<f64>,
    gait: &GaitParams,
    lambda_y_max: [f64; 2],
) -> QpProblem {
    let w = gait.weight_x;
    let mu = gait.friction;
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 1.0, //
            w, 0.0, 0.0, 0.0, //
            0.0, 0.0, w, 0.0,
        ],
    );
    let b = DVector::from_row_slice(&[tau_des.x, tau_des.y, 0.0, 0.0]);
    let c_ineq = DMatrix::from_row_slice(
        6,
        4,
        &[
            mu, -1.0, 0.0, 0.0, //
            -mu, -1.0, 0.0, 0.0, //
            0.0, 0.0, mu, -1.0, //
            0.0, 0.0, -mu, -1.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    );
    let d = DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, lambda_y_max[0], lambda_y_max[1]]);
    QpProblem::new(a.transpose() * &a, -(a.transpose() * b), c_ineq, d)
        .expect("distribution QP data is PSD by construction")
}

/// Distribute a desired net body force between the legs. Returns the per-leg
/// forces `(x_L, y_L, x_R, y_R)` and the solver status; a non-optimal status
/// is passed through for the caller's diagnostics.
pub fn distribute_forces(
    tau_des: Vector2<f64>,
    gait: &GaitParams,
    lambda_y_max: [f64; 2],
    solver: &mut ActiveSetSolver,
) -> (Vector4<f64>, QpStatus) {
    let problem = build_distribution_qp(tau_des, gait, lambda_y_max);
    let sol = solver.solve(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let lambda = Vector4::new(sol.x[0], sol.x[1], sol.x[2], sol.x[3]);
    (lambda, sol.status)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::brute_force_qp;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn body_reference_examples() {
        let (p, v) = body_reference(0.15, 0.62, 0.0, 10.0);
        assert_abs_diff_eq!(p.x, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 0.62, epsilon = 1e-12);
        assert_eq!(v, Vector2::new(0.15, 0.0));

        let (p0, _) = body_reference(0.15, 0.62, 0.3, 0.0);
        assert_eq!(p0, Vector2::new(0.3, 0.62));

        let (_, v1) = body_reference(0.15, 0.62, 0.0, 1.0);
        let (_, v2) = body_reference(0.15, 0.62, 0.0, 7.0);
        assert_eq!(v1, v2);
    }

    #[test]
    fn vmc_force_examples() {
        let gains = VmcGains::default();
        let body = BodyState::at(0.0, 0.62);
        let tau = vmc_force(&gains, 9.0, 9.81, body.position, Vector2::zeros(), &body);
        assert_abs_diff_eq!(tau.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(tau.y, 88.29, epsilon = 1e-10);

        // 1 cm forward position error through p_x = 300
        let tau = vmc_force(
            &gains,
            9.0,
            9.81,
            body.position + Vector2::new(0.01, 0.0),
            Vector2::zeros(),
            &body,
        );
        assert_abs_diff_eq!(tau.x, 3.0, epsilon = 1e-12);

        // -0.1 m/s vertical velocity error through d_y = 89.4
        let moving = BodyState::new(body.position, Vector2::new(0.0, 0.1));
        let tau = vmc_force(&gains, 9.0, 9.81, body.position, Vector2::zeros(), &moving);
        assert_abs_diff_eq!(tau.y, 9.0 * 9.81 - 8.94, epsilon = 1e-10);
    }

    #[test]
    fn distribution_qp_matrices_match_definition() {
        let gait = GaitParams::default(); // w_x = 1, mu = 0.5
        let tau = Vector2::new(3.0, 90.0);
        let p = build_distribution_qp(tau, &gait, [350.0, 200.0]);

        // H = A'A and c = -A'b for the printed A and b
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        let b = DVector::from_row_slice(&[tau.x, tau.y, 0.0, 0.0]);
        assert!((p.cost_matrix() - a.transpose() * &a).norm() < 1e-12);
        assert!((p.cost_vector() + a.transpose() * &b).norm() < 1e-12);

        // friction rows carry +-mu on the horizontal and -1 on the vertical
        // component; the last two rows are the vertical bounds
        let expected_c = DMatrix::from_row_slice(
            6,
            4,
            &[
                0.5, -1.0, 0.0, 0.0, //
                -0.5, -1.0, 0.0, 0.0, //
                0.0, 0.0, 0.5, -1.0, //
                0.0, 0.0, -0.5, -1.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        );
        let expected_d = DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, 350.0, 200.0]);
        assert_eq!(p.constraint_matrix(), &expected_c);
        assert_eq!(p.constraint_bound(), &expected_d);
    }

    #[test]
    fn swing_leg_zeroes_its_column() {
        let gait = GaitParams::default();
        // right leg in swing: its vertical bound drops to zero
        let p = build_distribution_qp(Vector2::new(0.0, 107.0), &gait, [350.0, 0.0]);
        let sol = brute_force_qp(&p);
        assert_abs_diff_eq!(sol.x[2], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.x[3], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn distribute_zero_demand_gives_zero_forces() {
        let gait = GaitParams::default();
        let mut solver = ActiveSetSolver::new();
        let (lambda, status) =
            distribute_forces(Vector2::zeros(), &gait, [350.0, 350.0], &mut solver);
        assert_eq!(status, QpStatus::Optimal);
        assert!(lambda.norm() < 1e-9);
    }

    #[test]
    fn vertical_demand_is_reproduced_when_unconstrained() {
        let gait = GaitParams::default();
        let mut solver = ActiveSetSolver::new();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let tau = Vector2::new(rng.gen_range(-20.0..20.0), rng.gen_range(20.0..200.0));
            let (lambda, status) = distribute_forces(tau, &gait, [350.0, 350.0], &mut solver);
            assert_eq!(status, QpStatus::Optimal);
            // the vertical rows of A carry no penalty: the sum matches exactly
            assert_abs_diff_eq!(lambda[1] + lambda[3], tau.y, epsilon = 1e-8);
            // the horizontal sum trades off against w_x; check against the oracle
            let oracle = brute_force_qp(&build_distribution_qp(tau, &gait, [350.0, 350.0]));
            assert!((lambda[0] - oracle.x[0]).abs() < 1e-6);
            assert!((lambda[2] - oracle.x[2]).abs() < 1e-6);
        }
    }

    #[test]
    fn distribution_respects_cone_and_bounds() {
        let gait = GaitParams::default();
        let mut solver = ActiveSetSolver::new();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let tau = Vector2::new(rng.gen_range(-150.0..150.0), rng.gen_range(-20.0..400.0));
            let max_l = if rng.gen_bool(0.3) { 0.0 } else { 350.0 };
            let max_r = if rng.gen_bool(0.3) { 0.0 } else { 350.0 };
            let (lambda, status) = distribute_forces(tau, &gait, [max_l, max_r], &mut solver);
            assert_eq!(status, QpStatus::Optimal);
            for (leg, max) in [(0, max_l), (1, max_r)] {
                let x = lambda[2 * leg];
                let y = lambda[2 * leg + 1];
                assert!(y >= -1e-8, "negative vertical force {y}");
                assert!(y <= max + 1e-8, "vertical force {y} above bound {max}");
                assert!(
                    (gait.friction * x).abs() <= y + 1e-8,
                    "outside friction cone: x={x} y={y}"
                );
            }
        }
    }
}
