//! Boundary value problems on `[0, ∞]` solved with non-standard finite
//! differences on quasi-uniform grids.
//!
//! The grid places its last node exactly at infinity, so boundary
//! conditions there are imposed as stated rather than at a truncated
//! boundary. Stencils only ever read finite fractional nodes.
//!
//! ```
//! use qubvp::prelude::*;
//!
//! let grid = QuasiUniformGrid::new(GridMap::logarithmic(5.0).unwrap(), 80).unwrap();
//! let problem = FalknerSkan::new(1.0);
//! let result = solve(&problem, &grid, &SolverConfig::default()).unwrap();
//! assert!(result.converged);
//! let fpp0 = report_scalar(&problem, &result, "fpp0").unwrap();
//! assert!((fpp0 - 1.232972).abs() < 1e-6);
//! ```

pub mod convergence;
pub mod error;
pub mod grid;
pub mod linear;
pub mod newton;
pub mod problem;
pub mod scheme;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::convergence::{
        extrapolate_table, observed_order, richardson_error, run_sweep, ExtrapolationTable, Sweep,
        SweepSeries,
    };
    pub use crate::error::{Error, Result};
    pub use crate::grid::{GridMap, MapKind, QuasiUniformGrid, StencilCoefficients};
    pub use crate::linear::{linear_solve, LinearSolver};
    pub use crate::newton::{newton_solve, solve, SolveResult, SolverConfig};
    pub use crate::problem::{
        report_scalar, BvpProblem, CustomProblem, FalknerSkan, Pile, Report, ReportNode,
    };
    pub use crate::scheme::{GridField, JacobianMode, Scheme};
}
