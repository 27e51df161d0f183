//! Plain Newton iteration on the discrete system.
//!
//! Full steps, no damping. Iteration stops once the mean absolute increment
//! over all `d (N + 1)` unknowns is at most `tol`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::QuasiUniformGrid;
use crate::linear::{linear_solve, LinearSolver};
use crate::problem::BvpProblem;
use crate::scheme::{GridField, JacobianMode, Scheme};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// `None` picks analytic derivatives when the problem has them.
    pub jacobian: Option<JacobianMode>,
    pub continuation: bool,
    pub linear_solver: LinearSolver,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 50,
            jacobian: None,
            continuation: true,
            linear_solver: LinearSolver::Bordered,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Argument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Argument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub solution: GridField,
    pub iterations: usize,
    /// Mean absolute increment of the last step taken.
    pub final_increment: f64,
    pub converged: bool,
    /// Mean absolute increment of every step, in order.
    pub increments: Vec<f64>,
}

/// Solves from the problem's own initial iterate.
pub fn solve(
    problem: &dyn BvpProblem,
    grid: &QuasiUniformGrid,
    config: &SolverConfig,
) -> Result<SolveResult> {
    Scheme::new(problem, grid, config.continuation)?;
    let initial = GridField::initial(problem, grid);
    newton_solve(problem, grid, initial, config)
}

pub fn newton_solve(
    problem: &dyn BvpProblem,
    grid: &QuasiUniformGrid,
    initial: GridField,
    config: &SolverConfig,
) -> Result<SolveResult> {
    config.validate()?;
    let scheme = Scheme::new(problem, grid, config.continuation)?;
    let mode = config.jacobian.unwrap_or_else(|| scheme.default_mode());
    if initial.dim() != problem.dim() || initial.nodes() != grid.intervals() + 1 {
        return Err(Error::Argument(format!(
            "initial field has {} nodes of dimension {}, expected {} of dimension {}",
            initial.nodes(),
            initial.dim(),
            grid.intervals() + 1,
            problem.dim()
        )));
    }
    if initial.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("initial iterate is not finite".into()));
    }

    let mut u = initial;
    let count = u.as_slice().len() as f64;
    let mut increments = Vec::new();

    for iteration in 1..=config.max_iter {
        let mut rhs = scheme.residual(&u)?;
        rhs.iter_mut().for_each(|r| *r = -*r);
        let jac = scheme.jacobian(&u, mode)?;
        let delta = linear_solve(&jac, &rhs, config.linear_solver).map_err(|e| match e {
            Error::Singular { column, .. } => Error::Singular { iteration, column },
            other => other,
        })?;

        for (v, dv) in u.as_mut_slice().iter_mut().zip(&delta) {
            *v += dv;
        }
        let mean = delta.iter().map(|v| v.abs()).sum::<f64>() / count;
        increments.push(mean);

        let finite = mean.is_finite() && u.as_slice().iter().all(|v| v.is_finite());
        if !finite || mean <= config.tol {
            return Ok(SolveResult {
                solution: u,
                iterations: iteration,
                final_increment: mean,
                converged: finite,
                increments,
            });
        }
    }

    Ok(SolveResult {
        solution: u,
        iterations: config.max_iter,
        final_increment: *increments.last().unwrap_or(&f64::INFINITY),
        converged: false,
        increments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridMap;
    use crate::problem::{report_scalar, CustomProblem, FalknerSkan, Pile};

    fn grid(n: usize) -> QuasiUniformGrid {
        QuasiUniformGrid::new(GridMap::logarithmic(5.0).unwrap(), n).unwrap()
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            tol: 0.0,
            ..Default::default()
        };
        assert!(solve(&FalknerSkan::default(), &grid(10), &bad).is_err());
        let bad = SolverConfig {
            max_iter: 0,
            ..Default::default()
        };
        assert!(solve(&FalknerSkan::default(), &grid(10), &bad).is_err());
    }

    #[test]
    fn falkner_skan_n20() {
        let p = FalknerSkan::default();
        let r = solve(&p, &grid(20), &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.iterations <= 8);
        assert!(r.final_increment <= 1e-6);
        assert!((report_scalar(&p, &r, "fpp0").unwrap() - 1.238724).abs() < 5e-7);
        assert!(report_scalar(&p, &r, "nope").is_err());
    }

    #[test]
    fn pile_n80() {
        let p = Pile::default();
        let r = solve(&p, &grid(80), &SolverConfig::default()).unwrap();
        assert!(r.converged && r.iterations <= 8);
        assert!((report_scalar(&p, &r, "u0").unwrap() - 1.421469).abs() < 5e-7);
        assert!((report_scalar(&p, &r, "du0").unwrap() + 0.808094).abs() < 5e-7);
    }

    #[test]
    fn dense_and_bordered_agree() {
        let p = Pile::default();
        let g = grid(40);
        let a = solve(&p, &g, &SolverConfig::default()).unwrap();
        let b = solve(
            &p,
            &g,
            &SolverConfig {
                linear_solver: LinearSolver::Dense,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a.iterations, b.iterations);
        for (x, y) in a.solution.as_slice().iter().zip(b.solution.as_slice()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn finite_difference_jacobian_converges_too() {
        let p = FalknerSkan::default();
        let cfg = SolverConfig {
            jacobian: Some(JacobianMode::FiniteDifference),
            ..Default::default()
        };
        let r = solve(&p, &grid(40), &cfg).unwrap();
        assert!(r.converged);
        assert!((report_scalar(&p, &r, "fpp0").unwrap() - 1.234124).abs() < 5e-7);
    }

    #[test]
    fn max_iter_exhaustion() {
        let cfg = SolverConfig {
            max_iter: 2,
            ..Default::default()
        };
        let r = solve(&FalknerSkan::default(), &grid(20), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
        assert_eq!(r.increments.len(), 2);
        assert!(r.final_increment > cfg.tol);
    }

    #[test]
    fn singular_system_carries_iteration() {
        // boundary function ignores the unknowns entirely
        let p =
            CustomProblem::new(1, |_, u, out| out[0] = -u[0], |_, _, out| out[0] = 1.0).unwrap();
        let err = solve(&p, &grid(10), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Singular { iteration: 1, .. }));
    }

    #[test]
    fn blow_up_is_not_converged() {
        let p = CustomProblem::new(
            1,
            |_, u, out| out[0] = u[0] * u[0] * u[0] * 1e200,
            |u0, _, out| out[0] = u0[0] - 1e100,
        )
        .unwrap()
        .with_initial(|_, out| out[0] = 1.0);
        match solve(&p, &grid(5), &SolverConfig::default()) {
            Ok(r) => assert!(!r.converged),
            Err(e) => assert!(matches!(
                e,
                Error::Evaluation { .. } | Error::Singular { .. }
            )),
        }
    }

    #[test]
    fn whole_line_grid_is_rejected() {
        let g = QuasiUniformGrid::new(GridMap::tangential(1.0).unwrap(), 10).unwrap();
        let err = solve(&FalknerSkan::default(), &g, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    #[test]
    fn mismatched_initial_field() {
        let p = FalknerSkan::default();
        let err = newton_solve(
            &p,
            &grid(10),
            GridField::zeros(3, 5),
            &SolverConfig::default(),
        );
        assert!(err.is_err());
    }
}
