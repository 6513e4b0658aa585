use crate::expr::{LinExpr, PsdBlock, ScalarVar, Var};
use crate::problem::EqualityId;
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A Farkas certificate for primal infeasibility was found.
    Infeasible,
    /// A primal improving ray was found (the dual is infeasible).
    Unbounded,
    NumericalFailure,
}

/// Residuals of the returned point, measured on the unscaled data.
#[derive(Clone, Copy, Debug, Default)]
pub struct Residuals {
    /// `‖Ax − b‖∞`
    pub primal: f64,
    /// `‖c − Aᵀy − z‖∞` with `z` restricted to the cone part.
    pub dual: f64,
    /// `|primal objective − dual objective|`
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub residuals: Residuals,
    pub(crate) scalars: Vec<f64>,
    pub(crate) blocks: Vec<DMatrix<f64>>,
    pub(crate) dual_slacks: Vec<DMatrix<f64>>,
    pub(crate) duals: Vec<f64>,
}

impl ConicSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, v: impl Into<Var>) -> f64 {
        match v.into() {
            Var::Scalar(i) => self.scalars[i],
            Var::Entry { block, row, col } => self.blocks[block][(row, col)],
        }
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.scalars[v.0]
    }

    pub fn eval(&self, expr: &LinExpr) -> f64 {
        expr.eval_with(|v| self.value(v))
    }

    pub fn block(&self, b: PsdBlock) -> &DMatrix<f64> {
        &self.blocks[b.id]
    }

    /// Dual slack matrix `Z = C − Σ yₖ Aₖ` restricted to the block.
    pub fn dual_slack(&self, b: PsdBlock) -> &DMatrix<f64> {
        &self.dual_slacks[b.id]
    }

    /// Multiplier of the equality; the dual reads `max bᵀy s.t. c − Aᵀy ∈ K*`.
    pub fn dual(&self, e: EqualityId) -> f64 {
        self.duals[e.0]
    }

    pub fn duals(&self) -> &[f64] {
        &self.duals
    }

    /// Smallest eigenvalue over all PSD blocks (`+∞` if there are none).
    pub fn min_block_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                if b.nrows() == 1 {
                    b[(0, 0)]
                } else {
                    b.clone().symmetric_eigenvalues().min()
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}
