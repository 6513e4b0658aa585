//! Linear programs over free scalars and PSD matrix blocks.
//!
//! Problems are built with [`ConicProblem`] in equality form and solved by a
//! homogeneous self-dual interior-point method. Nonnegative scalars are 1×1
//! blocks.
//!
//! ```
//! use polyce_conic::{ConicProblem, LinExpr, SolveStatus, SolverOptions};
//!
//! let mut p = ConicProblem::new();
//! let x = p.add_psd_block(2).unwrap();
//! p.add_equality(LinExpr::from(x.entry(0, 0)) + LinExpr::from(x.entry(1, 1)), 1.0).unwrap();
//! p.set_objective(x.entry(0, 1)).unwrap();
//! let sol = p.solve(&SolverOptions::default()).unwrap();
//! assert_eq!(sol.status, SolveStatus::Optimal);
//! assert!((sol.objective_value + 0.5).abs() < 1e-6);
//! ```

mod expr;
mod ipm;
mod problem;
pub mod sdpa;
mod solution;

pub use expr::{LinExpr, PsdBlock, ScalarVar, Var};
pub use problem::{solve, ConicError, ConicProblem, EqualityId, SolverOptions};
pub use solution::{ConicSolution, Residuals, SolveStatus};

/// A conic solver behind a common interface, so that an external backend can
/// stand in for the built-in interior-point method.
pub trait ConicSolver {
    fn solve(&self, problem: &ConicProblem, tol: f64) -> Result<ConicSolution, ConicError>;
}

/// The built-in homogeneous self-dual interior-point method.
#[derive(Clone, Debug, Default)]
pub struct InteriorPoint {
    pub options: SolverOptions,
}

impl ConicSolver for InteriorPoint {
    fn solve(&self, problem: &ConicProblem, tol: f64) -> Result<ConicSolution, ConicError> {
        problem.solve(&SolverOptions {
            tol,
            ..self.options.clone()
        })
    }
}
