use crate::expr::{LinExpr, PsdBlock, ScalarVar, Var};
use crate::ipm;
use crate::solution::ConicSolution;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConicError {
    #[error("unknown scalar variable {0}")]
    UnknownScalar(usize),
    #[error("unknown PSD block {0}")]
    UnknownBlock(usize),
    #[error("entry ({row}, {col}) out of range for block {block} of dimension {dim}")]
    EntryOutOfRange {
        block: usize,
        row: usize,
        col: usize,
        dim: usize,
    },
    #[error("PSD blocks must have dimension at least 1")]
    EmptyBlock,
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("problem has no variables")]
    NoVariables,
    #[error("tolerance {0} outside (0, 1e-2]")]
    BadTolerance(f64),
}

/// Handle to an equality constraint, used to read its dual multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EqualityId(pub(crate) usize);

impl EqualityId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Equality {
    pub terms: Vec<(Var, f64)>,
    pub rhs: f64,
}

/// Solver settings. `tol` is the relative stopping tolerance for primal and
/// dual residuals and the duality gap.
#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Threshold on normalized Farkas residuals for declaring infeasibility.
    pub infeasibility_tol: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 150,
            infeasibility_tol: 1e-8,
            step_fraction: 0.98,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }
}

/// minimize `objective` subject to linear equalities over free scalars and
/// PSD matrix blocks.
#[derive(Clone, Debug, Default)]
pub struct ConicProblem {
    num_scalars: usize,
    blocks: Vec<usize>,
    equalities: Vec<Equality>,
    objective: LinExpr,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_scalar_var(&mut self) -> ScalarVar {
        self.num_scalars += 1;
        ScalarVar(self.num_scalars - 1)
    }

    pub fn add_scalar_vars(&mut self, n: usize) -> Vec<ScalarVar> {
        (0..n).map(|_| self.add_scalar_var()).collect()
    }

    pub fn add_psd_block(&mut self, dim: usize) -> Result<PsdBlock, ConicError> {
        if dim == 0 {
            return Err(ConicError::EmptyBlock);
        }
        self.blocks.push(dim);
        Ok(PsdBlock {
            id: self.blocks.len() - 1,
            dim,
        })
    }

    /// A nonnegative scalar, realized as a 1×1 PSD block.
    pub fn add_nonneg_var(&mut self) -> Var {
        self.add_psd_block(1).expect("dimension 1").scalar()
    }

    /// Adds `expr == rhs`. A constant term in `expr` is moved to the right side.
    pub fn add_equality(
        &mut self,
        expr: impl Into<LinExpr>,
        rhs: f64,
    ) -> Result<EqualityId, ConicError> {
        let expr = expr.into().compacted();
        self.check_expr(&expr, "equality")?;
        if !rhs.is_finite() {
            return Err(ConicError::NonFinite("equality right-hand side"));
        }
        self.equalities.push(Equality {
            terms: expr.terms().to_vec(),
            rhs: rhs - expr.constant_term(),
        });
        Ok(EqualityId(self.equalities.len() - 1))
    }

    /// Sets the objective to be minimized.
    pub fn set_objective(&mut self, expr: impl Into<LinExpr>) -> Result<(), ConicError> {
        let expr = expr.into().compacted();
        self.check_expr(&expr, "objective")?;
        self.objective = expr;
        Ok(())
    }

    pub fn num_scalars(&self) -> usize {
        self.num_scalars
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.blocks
    }

    pub fn num_equalities(&self) -> usize {
        self.equalities.len()
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub(crate) fn equalities(&self) -> &[Equality] {
        &self.equalities
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<ConicSolution, ConicError> {
        if self.num_scalars == 0 && self.blocks.is_empty() {
            return Err(ConicError::NoVariables);
        }
        if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
            return Err(ConicError::BadTolerance(opts.tol));
        }
        Ok(ipm::solve(self, opts))
    }

    fn check_expr(&self, expr: &LinExpr, what: &'static str) -> Result<(), ConicError> {
        if !expr.constant_term().is_finite() {
            return Err(ConicError::NonFinite(what));
        }
        for &(v, c) in expr.terms() {
            if !c.is_finite() {
                return Err(ConicError::NonFinite(what));
            }
            self.check_var(v)?;
        }
        Ok(())
    }

    pub(crate) fn check_var(&self, v: Var) -> Result<(), ConicError> {
        match v {
            Var::Scalar(i) if i >= self.num_scalars => Err(ConicError::UnknownScalar(i)),
            Var::Scalar(_) => Ok(()),
            Var::Entry { block, row, col } => {
                let dim = *self
                    .blocks
                    .get(block)
                    .ok_or(ConicError::UnknownBlock(block))?;
                if row >= dim || col >= dim {
                    Err(ConicError::EntryOutOfRange {
                        block,
                        row,
                        col,
                        dim,
                    })
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Solves with the given relative tolerance and default settings otherwise.
pub fn solve(problem: &ConicProblem, tol: f64) -> Result<ConicSolution, ConicError> {
    problem.solve(&SolverOptions::with_tol(tol))
}
