//! Small dense inequality-constrained quadratic programs.
//!
//! Solves
//!
//! ```text
//! minimize    1/2 x' H x + c' x
//! subject to  C x <= d
//! ```
//!
//! with a primal active-set method sized for the force-distribution problem
//! (n = 4 variables, m = 6 constraints) but accepting general small `n`, `m`.
//! [`brute_force_qp`] enumerates every candidate active set and serves as an
//! independent verification oracle.
//!
//! `H` only has to be positive *semi*definite. Rank-deficient KKT systems are
//! resolved by minimum-norm least-squares solves, and when the Hessian has a
//! null space the optimal face can contain more than one point; [`solve_qp`]
//! then returns the minimum-norm point of that face, which is also what the
//! oracle's lexicographic tie-breaking selects.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default KKT tolerance for [`solve_qp`].
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default iteration budget for [`solve_qp`].
pub const DEFAULT_MAX_ITER: usize = 200;

/// Constraints counted as active when within this of their bound.
const ACTIVE_TOL: f64 = 1e-7;
/// Relative eigenvalue threshold below which a Hessian direction counts as null.
const KERNEL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum QpError {
    #[error("cost matrix must be {n}x{n} to match the {n}-dimensional cost vector")]
    CostShape { n: usize },
    #[error("constraint matrix is {rows}x{cols}, expected {m}x{n}")]
    ConstraintShape {
        rows: usize,
        cols: usize,
        m: usize,
        n: usize,
    },
    #[error("cost matrix has eigenvalue {eigenvalue:.3e}; it must be positive semidefinite")]
    NotPositiveSemidefinite { eigenvalue: f64 },
}

/// Dense QP data. Construction symmetrizes `H` and verifies it is PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    h: DMatrix<f64>,
    c: DVector<f64>,
    c_ineq: DMatrix<f64>,
    d: DVector<f64>,
}

impl QpProblem {
    pub fn new(
        h: DMatrix<f64>,
        c: DVector<f64>,
        c_ineq: DMatrix<f64>,
        d: DVector<f64>,
    ) -> Result<Self, QpError> {
        let n = c.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(QpError::CostShape { n });
        }
        let m = d.len();
        if c_ineq.nrows() != m || (m > 0 && c_ineq.ncols() != n) {
            return Err(QpError::ConstraintShape {
                rows: c_ineq.nrows(),
                cols: c_ineq.ncols(),
                m,
                n,
            });
        }
        let h = (&h + h.transpose()) * 0.5;
        let eigs = h.clone().symmetric_eigen().eigenvalues;
        let scale = eigs.iter().fold(1.0f64, |a, &e| a.max(e.abs()));
        if let Some(&min) = eigs
            .iter()
            .min_by(|a, b| a.partial_cmp(b).expect("non-NaN eigenvalue"))
        {
            if min < -1e-10 * scale {
                return Err(QpError::NotPositiveSemidefinite { eigenvalue: min });
            }
        }
        Ok(Self { h, c, c_ineq, d })
    }

    pub fn unconstrained(h: DMatrix<f64>, c: DVector<f64>) -> Result<Self, QpError> {
        let n = c.len();
        Self::new(h, c, DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn num_variables(&self) -> usize {
        self.c.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.d.len()
    }

    pub fn cost_matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn cost_vector(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.c_ineq
    }

    pub fn constraint_bound(&self) -> &DVector<f64> {
        &self.d
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * (x.transpose() * &self.h * x)[(0, 0)] + self.c.dot(x)
    }

    /// Gradient of the objective, `H x + c`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.h * x + &self.c
    }

    /// Largest constraint violation, `max_i (C_i x - d_i)`; negative when interior.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.num_constraints() {
            worst = worst.max(self.c_ineq.row(i).dot(&x.transpose()) - self.d[i]);
        }
        if worst == f64::NEG_INFINITY {
            0.0
        } else {
            worst
        }
    }

    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.max_violation(x) <= tol
    }

    fn active_rows(&self, x: &DVector<f64>, tol: f64) -> Vec<usize> {
        (0..self.num_constraints())
            .filter(|&i| (self.c_ineq.row(i).dot(&x.transpose()) - self.d[i]).abs() <= tol)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Indices of inequality rows active at `x`, ascending.
    pub active_set: Vec<usize>,
    /// Lagrange multipliers for the rows in `active_set` (same order).
    pub multipliers: Vec<f64>,
    pub objective: f64,
    pub status: QpStatus,
}

/// Solve the KKT system for an equality-constrained subproblem:
///
/// ```text
/// [ H   C_W' ] [ x  ]   [ -c  ]
/// [ C_W  0   ] [ mu ] = [ d_W ]
/// ```
///
/// via SVD, which yields the minimum-norm least-squares solution when the
/// system is rank deficient. Returns `(x, mu, residual)`; a large residual
/// means the equalities are inconsistent and the candidate is invalid.
fn kkt_solve(p: &QpProblem, working: &[usize]) -> Option<(DVector<f64>, DVector<f64>, f64)> {
    let n = p.num_variables();
    let k = working.len();
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(&p.h);
    for (j, &row) in working.iter().enumerate() {
        for i in 0..n {
            kkt[(n + j, i)] = p.c_ineq[(row, i)];
            kkt[(i, n + j)] = p.c_ineq[(row, i)];
        }
    }
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(&(-&p.c));
    for (j, &row) in working.iter().enumerate() {
        rhs[n + j] = p.d[row];
    }

    let svd = kkt.clone().svd(true, true);
    let sv_max = svd.singular_values.max();
    let eps = (1e-12 * sv_max).max(f64::MIN_POSITIVE);
    let sol = svd.solve(&rhs, eps).ok()?;
    let residual = (&kkt * &sol - &rhs).norm();
    let x = sol.rows(0, n).into_owned();
    let mu = sol.rows(n, k).into_owned();
    Some((x, mu, residual))
}

/// Find a feasible start. `x = 0` is checked first (it is always feasible for
/// the force-distribution data, where `d >= 0`); otherwise successive
/// projections onto the most violated half-space are attempted.
fn feasible_start(p: &QpProblem, tol: f64) -> Option<DVector<f64>> {
    let n = p.num_variables();
    let mut x = DVector::zeros(n);
    if p.is_feasible(&x, tol) {
        return Some(x);
    }
    for _ in 0..100 * (p.num_constraints() + 1) {
        let mut worst = (0, f64::NEG_INFINITY);
        for i in 0..p.num_constraints() {
            let v = p.c_ineq.row(i).dot(&x.transpose()) - p.d[i];
            if v > worst.1 {
                worst = (i, v);
            }
        }
        if worst.1 <= tol {
            return Some(x);
        }
        let row = p.c_ineq.row(worst.0).transpose();
        let norm2 = row.norm_squared();
        if norm2 <= f64::MIN_POSITIVE {
            return None; // zero row with d < 0 is unsatisfiable
        }
        x -= row * (worst.1 / norm2);
    }
    None
}

/// Warm-startable primal active-set solver.
///
/// Holds the previous solution and active set; when the next problem has the
/// same dimensions and the old point is still feasible, the solve resumes from
/// there. The solver carries no other state and is cheap to clone.
#[derive(Debug, Clone, Default)]
pub struct ActiveSetSolver {
    warm_x: Option<DVector<f64>>,
    warm_active: Vec<usize>,
}

impl ActiveSetSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, p: &QpProblem, tol: f64, max_iter: usize) -> QpSolution {
        let feas_tol = tol.max(1e-12);

        let mut x;
        let mut working: Vec<usize>;
        match &self.warm_x {
            Some(prev) if prev.len() == p.num_variables() && p.is_feasible(prev, feas_tol) => {
                x = prev.clone();
                let active = p.active_rows(&x, ACTIVE_TOL);
                working = self
                    .warm_active
                    .iter()
                    .copied()
                    .filter(|i| active.contains(i))
                    .collect();
            }
            _ => match feasible_start(p, feas_tol) {
                Some(start) => {
                    x = start;
                    working = p.active_rows(&x, feas_tol);
                }
                None => {
                    self.warm_x = None;
                    self.warm_active.clear();
                    return QpSolution {
                        x: DVector::zeros(p.num_variables()),
                        active_set: Vec::new(),
                        multipliers: Vec::new(),
                        objective: 0.0,
                        status: QpStatus::Infeasible,
                    };
                }
            },
        }

        let bland_after = 3 * (p.num_variables() + p.num_constraints());
        let mut status = QpStatus::MaxIterations;

        for iter in 0..max_iter {
            let Some((x_eq, mu, _residual)) = kkt_solve(p, &working) else {
                break;
            };
            let step = &x_eq - &x;

            if step.norm() <= tol * (1.0 + x.norm()) {
                // stationary on the working set: check multiplier signs
                let blocking = if iter >= bland_after {
                    // Bland's rule: smallest index with a negative multiplier
                    working
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| mu[j] < -tol)
                        .min_by_key(|&(_, &row)| row)
                        .map(|(j, _)| j)
                } else {
                    working
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| mu[j] < -tol)
                        .min_by(|&(a, _), &(b, _)| {
                            mu[a].partial_cmp(&mu[b]).expect("non-NaN multiplier")
                        })
                        .map(|(j, _)| j)
                };
                match blocking {
                    None => {
                        x = x_eq;
                        status = QpStatus::Optimal;
                        break;
                    }
                    Some(j) => {
                        working.remove(j);
                    }
                }
            } else {
                // longest feasible step toward the subproblem optimum
                let mut alpha = 1.0;
                let mut blocker = None;
                for i in 0..p.num_constraints() {
                    if working.contains(&i) {
                        continue;
                    }
                    let rate = p.c_ineq.row(i).dot(&step.transpose());
                    if rate > 1e-12 {
                        let slack = p.d[i] - p.c_ineq.row(i).dot(&x.transpose());
                        let a = (slack / rate).max(0.0);
                        if a < alpha {
                            alpha = a;
                            blocker = Some(i);
                        }
                    }
                }
                x += step * alpha;
                if let Some(i) = blocker {
                    working.push(i);
                    working.sort_unstable();
                }
            }
        }

        if status == QpStatus::Optimal {
            if let Some(polished) = polish_minimum_norm(p, &x, feas_tol) {
                x = polished;
            }
        }

        let active_set = p.active_rows(&x, ACTIVE_TOL * (1.0 + x.norm()));
        let multipliers = recover_multipliers(p, &x, &active_set);
        self.warm_x = Some(x.clone());
        self.warm_active = active_set.clone();
        QpSolution {
            objective: p.objective(&x),
            x,
            active_set,
            multipliers,
            status,
        }
    }
}

/// One-shot solve with a fresh (cold-started) solver.
pub fn solve_qp(p: &QpProblem, tol: f64, max_iter: usize) -> QpSolution {
    ActiveSetSolver::new().solve(p, tol, max_iter)
}

/// When `H` has a null space the set of minimizers can be a face rather than a
/// point. The face is `x* + {v in ker(H) : c'v = 0}` intersected with the
/// feasible region; this picks its minimum-norm element by solving a small
/// strictly convex QP in the null-space coordinates.
fn polish_minimum_norm(p: &QpProblem, x: &DVector<f64>, feas_tol: f64) -> Option<DVector<f64>> {
    let n = p.num_variables();
    let eigen = p.h.clone().symmetric_eigen();
    let scale = eigen
        .eigenvalues
        .iter()
        .fold(1.0f64, |a, &e| a.max(e.abs()));
    let null_cols: Vec<usize> = (0..n)
        .filter(|&i| eigen.eigenvalues[i].abs() <= KERNEL_TOL * scale)
        .collect();
    if null_cols.is_empty() {
        return None;
    }
    let k = null_cols.len();
    let mut basis = DMatrix::zeros(n, k);
    for (j, &i) in null_cols.iter().enumerate() {
        basis.column_mut(j).copy_from(&eigen.eigenvectors.column(i));
    }

    // minimize 1/2 |x + V z|^2  s.t.  C V z <= d - C x,  c' V z = 0
    let h_z = DMatrix::identity(k, k);
    let c_z = basis.transpose() * x;
    let m = p.num_constraints();
    let mut cons = DMatrix::zeros(m + 2, k);
    let mut bound = DVector::zeros(m + 2);
    let cv = &p.c_ineq * &basis;
    cons.view_mut((0, 0), (m, k)).copy_from(&cv);
    for i in 0..m {
        // x is feasible up to feas_tol; clamp fp dust so z = 0 stays a valid start
        bound[i] = (p.d[i] - p.c_ineq.row(i).dot(&x.transpose())).max(0.0);
    }
    let obj_dir = basis.transpose() * &p.c;
    for j in 0..k {
        cons[(m, j)] = obj_dir[j];
        cons[(m + 1, j)] = -obj_dir[j];
    }

    let sub = QpProblem::new(h_z, c_z, cons, bound).ok()?;
    let sol = ActiveSetSolver::new().solve(&sub, DEFAULT_TOL, DEFAULT_MAX_ITER);
    if sol.status != QpStatus::Optimal {
        return None;
    }
    let candidate = x + &basis * sol.x;
    let improves = candidate.norm() < x.norm() - 1e-12;
    let same_objective =
        (p.objective(&candidate) - p.objective(x)).abs() <= 1e-9 * (1.0 + p.objective(x).abs());
    (improves && same_objective && p.is_feasible(&candidate, 10.0 * feas_tol)).then_some(candidate)
}

/// Minimum-norm multipliers for the given active rows from the stationarity
/// condition `H x + c + C_A' mu = 0`.
fn recover_multipliers(p: &QpProblem, x: &DVector<f64>, active: &[usize]) -> Vec<f64> {
    if active.is_empty() {
        return Vec::new();
    }
    let n = p.num_variables();
    let mut at = DMatrix::zeros(n, active.len());
    for (j, &row) in active.iter().enumerate() {
        for i in 0..n {
            at[(i, j)] = p.c_ineq[(row, i)];
        }
    }
    let rhs = -p.gradient(x);
    let svd = at.svd(true, true);
    let eps = (1e-12 * svd.singular_values.max()).max(f64::MIN_POSITIVE);
    match svd.solve(&rhs, eps) {
        Ok(mu) => mu.iter().copied().collect(),
        Err(_) => vec![0.0; active.len()],
    }
}

/// Exhaustive verification oracle: tries every subset of constraints as the
/// active set, solves the corresponding KKT system, keeps candidates that are
/// primal feasible with nonnegative multipliers, and returns the one with the
/// least objective. Equal-objective ties go to the lexicographically smallest
/// active set, which for a singular Hessian selects the minimum-norm optimum.
///
/// Cost is `2^m` KKT solves; callers must keep `m <= 12`.
pub fn brute_force_qp(p: &QpProblem) -> QpSolution {
    let m = p.num_constraints();
    assert!(
        m <= 12,
        "brute-force enumeration is limited to 12 constraints"
    );

    let mut best: Option<QpSolution> = None;
    for mask in 0u32..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let Some((x, mu, residual)) = kkt_solve(p, &subset) else {
            continue;
        };
        if residual > 1e-8 * (1.0 + p.c.norm() + p.d.norm()) {
            continue; // inconsistent equality system
        }
        if !p.is_feasible(&x, 1e-8 * (1.0 + x.norm())) {
            continue;
        }
        if mu.iter().any(|&v| v < -1e-8) {
            continue;
        }
        let objective = p.objective(&x);
        let replace = match &best {
            None => true,
            Some(b) => {
                let tie = 1e-9 * (1.0 + b.objective.abs());
                objective < b.objective - tie
                    || ((objective - b.objective).abs() <= tie && subset < b.active_set)
            }
        };
        if replace {
            best = Some(QpSolution {
                x,
                active_set: subset,
                multipliers: mu.iter().copied().collect(),
                objective,
                status: QpStatus::Optimal,
            });
        }
    }

    best.unwrap_or_else(|| QpSolution {
        x: DVector::zeros(p.num_variables()),
        active_set: Vec::new(),
        multipliers: Vec::new(),
        objective: 0.0,
        status: QpStatus::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The force-distribution QP in its raw form, for solver tests. See
    /// `control::vmc::build_distribution_qp` for the production constructor.
    fn distribution_problem(tau: [f64; 2], w_x: f64, mu: f64, max_l: f64, max_r: f64) -> QpProblem {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, //
                w_x, 0.0, 0.0, 0.0, //
                0.0, 0.0, w_x, 0.0,
            ],
        );
        let b = DVector::from_row_slice(&[tau[0], tau[1], 0.0, 0.0]);
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
        let d = DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, max_l, max_r]);
        QpProblem::new(a.transpose() * &a, -(a.transpose() * b), c_ineq, d).unwrap()
    }

    fn assert_close(x: &DVector<f64>, expected: &[f64], tol: f64) {
        for (i, &e) in expected.iter().enumerate() {
            assert!(
                (x[i] - e).abs() < tol,
                "component {i}: got {} expected {e}",
                x[i]
            );
        }
    }

    #[test]
    fn double_support_splits_symmetrically() {
        let p = distribution_problem([0.0, 107.0], 1.0, 0.5, 350.0, 350.0);
        let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_close(&sol.x, &[0.0, 53.5, 0.0, 53.5], 1e-8);

        let oracle = brute_force_qp(&p);
        assert_eq!(oracle.status, QpStatus::Optimal);
        assert_close(&oracle.x, &[0.0, 53.5, 0.0, 53.5], 1e-8);
    }

    #[test]
    fn single_support_loads_one_leg() {
        let p = distribution_problem([0.0, 107.0], 1.0, 0.5, 350.0, 0.0);
        let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_close(&sol.x, &[0.0, 107.0, 0.0, 0.0], 1e-8);
        assert_close(&brute_force_qp(&p).x, &[0.0, 107.0, 0.0, 0.0], 1e-8);
    }

    #[test]
    fn single_support_with_horizontal_demand() {
        // the w_x penalty halves the realized horizontal force; the friction
        // bound (53.5 N) stays inactive
        let p = distribution_problem([100.0, 107.0], 1.0, 0.5, 350.0, 0.0);
        let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_close(&sol.x, &[50.0, 107.0, 0.0, 0.0], 1e-8);
        assert_close(&brute_force_qp(&p).x, &[50.0, 107.0, 0.0, 0.0], 1e-8);
    }

    #[test]
    fn unconstrained_problem_returns_newton_point() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let c = DVector::from_row_slice(&[1.0, -2.0]);
        let p = QpProblem::unconstrained(h.clone(), c.clone()).unwrap();
        let expected = -h.try_inverse().unwrap() * &c;

        let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((&sol.x - &expected).norm() < 1e-10);

        let oracle = brute_force_qp(&p);
        assert!((&oracle.x - &expected).norm() < 1e-10);
        assert!(oracle.active_set.is_empty());
    }

    #[test]
    fn box_vertex_with_all_constraints_active() {
        // H = I, c pointing outside the box x <= 1: the optimum is the corner
        let n = 3;
        let p = QpProblem::new(
            DMatrix::identity(n, n),
            DVector::from_element(n, -5.0),
            DMatrix::identity(n, n),
            DVector::from_element(n, 1.0),
        )
        .unwrap();
        let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_close(&sol.x, &[1.0, 1.0, 1.0], 1e-9);
        assert_eq!(sol.active_set, vec![0, 1, 2]);

        let oracle = brute_force_qp(&p);
        assert_close(&oracle.x, &[1.0, 1.0, 1.0], 1e-9);
        assert_eq!(oracle.active_set, vec![0, 1, 2]);
    }

    #[test]
    fn infeasible_problem_is_reported() {
        // x <= -1 and -x <= -1 cannot both hold
        let p = QpProblem::new(
            DMatrix::identity(1, 1),
            DVector::zeros(1),
            DMatrix::from_row_slice(2, 1, &[1.0, -1.0]),
            DVector::from_row_slice(&[-1.0, -1.0]),
        )
        .unwrap();
        assert_eq!(
            solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).status,
            QpStatus::Infeasible
        );
        assert_eq!(brute_force_qp(&p).status, QpStatus::Infeasible);
    }

    #[test]
    fn rejects_indefinite_cost() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(
            QpProblem::unconstrained(h, DVector::zeros(2)),
            Err(QpError::NotPositiveSemidefinite { .. })
        ));
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> QpProblem {
        let n = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=6);
        let mat = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let h = mat.transpose() * &mat + DMatrix::identity(n, n) * 1e-6;
        let c = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
        let c_ineq = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
        let d = DVector::from_fn(m, |_, _| rng.gen_range(0.0..2.0));
        QpProblem::new(h, c, c_ineq, d).unwrap()
    }

    #[test]
    fn matches_oracle_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..300 {
            let p = random_instance(&mut rng);
            let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
            let oracle = brute_force_qp(&p);
            if sol.status == QpStatus::Optimal && oracle.status == QpStatus::Optimal {
                assert!(
                    (sol.objective - oracle.objective).abs() < 1e-7,
                    "trial {trial}: objective {} vs oracle {}",
                    sol.objective,
                    oracle.objective
                );
                assert!(
                    (&sol.x - &oracle.x).norm() < 1e-6,
                    "trial {trial}: x {:?} vs oracle {:?}",
                    sol.x,
                    oracle.x
                );
            }
        }
    }

    #[test]
    fn kkt_conditions_hold_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let p = random_instance(&mut rng);
            let sol = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
            assert_eq!(sol.status, QpStatus::Optimal);
            assert!(p.is_feasible(&sol.x, 1e-8));

            let mut stationarity = p.gradient(&sol.x);
            for (j, &row) in sol.active_set.iter().enumerate() {
                assert!(sol.multipliers[j] >= -1e-9, "negative multiplier");
                for i in 0..p.num_variables() {
                    stationarity[i] += sol.multipliers[j] * p.c_ineq[(row, i)];
                }
            }
            assert!(
                stationarity.norm() < 1e-7,
                "stationarity residual {}",
                stationarity.norm()
            );
        }
    }

    #[test]
    fn scaling_cost_leaves_argmin_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = random_instance(&mut rng);
            let alpha = rng.gen_range(0.1..50.0);
            let scaled = QpProblem::new(
                p.h.clone() * alpha,
                p.c.clone() * alpha,
                p.c_ineq.clone(),
                p.d.clone(),
            )
            .unwrap();
            let a = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
            let b = solve_qp(&scaled, DEFAULT_TOL, DEFAULT_MAX_ITER);
            assert!(
                (&a.x - &b.x).norm() < 1e-8 * (1.0 + a.x.norm()),
                "argmin moved under cost scaling"
            );
        }
    }

    #[test]
    fn warm_start_reproduces_cold_solution() {
        let mut solver = ActiveSetSolver::new();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        // a slowly drifting sequence of related problems, as in the control loop
        for step in 0..50 {
            let tau_y = 88.0 + 20.0 * (step as f64 * 0.3).sin();
            let tau_x = 10.0 * (step as f64 * 0.2).cos();
            let max_r = if step % 7 < 3 { 0.0 } else { 350.0 };
            let p = distribution_problem([tau_x, tau_y], 1.0, 0.5, 350.0, max_r);
            let warm = solver.solve(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
            let cold = solve_qp(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
            assert_eq!(warm.status, QpStatus::Optimal);
            assert!(
                (&warm.x - &cold.x).norm() < 1e-7,
                "step {step}: warm {:?} cold {:?}",
                warm.x,
                cold.x
            );
            let _ = rng.gen::<f64>();
        }
    }
}
