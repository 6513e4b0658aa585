use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// A decision variable: either a free scalar or one entry of a PSD block.
///
/// PSD entries are symmetric, so `(row, col)` is stored with `row >= col`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Scalar(usize),
    Entry {
        block: usize,
        row: usize,
        col: usize,
    },
}

/// Handle to a free scalar variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarVar(pub(crate) usize);

impl ScalarVar {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<ScalarVar> for Var {
    fn from(v: ScalarVar) -> Var {
        Var::Scalar(v.0)
    }
}

/// Handle to a symmetric positive semidefinite matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PsdBlock {
    pub(crate) id: usize,
    pub(crate) dim: usize,
}

impl PsdBlock {
    pub fn index(self) -> usize {
        self.id
    }

    pub fn dim(self) -> usize {
        self.dim
    }

    /// The `(i, j)` entry; `entry(i, j)` and `entry(j, i)` are the same variable.
    pub fn entry(self, i: usize, j: usize) -> Var {
        let (row, col) = if i >= j { (i, j) } else { (j, i) };
        Var::Entry {
            block: self.id,
            row,
            col,
        }
    }

    /// The `(0, 0)` entry, handy for 1×1 blocks used as nonnegative scalars.
    pub fn scalar(self) -> Var {
        self.entry(0, 0)
    }
}

/// An affine expression `Σ coef·var + constant`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    terms: Vec<(Var, f64)>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(var: impl Into<Var>, coef: f64) -> Self {
        LinExpr {
            terms: vec![(var.into(), coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, var: impl Into<Var>, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((var.into(), coef));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    /// Adds `scale · other` in place.
    pub fn add_scaled(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        if scale != 0.0 {
            self.terms
                .extend(other.terms.iter().map(|&(v, c)| (v, c * scale)));
            self.constant += scale * other.constant;
        }
        self
    }

    pub fn terms(&self) -> &[(Var, f64)] {
        &self.terms
    }

    pub fn constant_term(&self) -> f64 {
        self.constant
    }

    /// True when no variable appears (after merging duplicates).
    pub fn is_constant(&self) -> bool {
        self.compacted().terms.is_empty()
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn compacted(&self) -> LinExpr {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(Var, f64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match out.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += c,
                _ => out.push((v, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        LinExpr {
            terms: out,
            constant: self.constant,
        }
    }

    /// Evaluates the expression with a variable lookup.
    pub fn eval_with(&self, mut value: impl FnMut(Var) -> f64) -> f64 {
        self.terms
            .iter()
            .fold(self.constant, |acc, &(v, c)| acc + c * value(v))
    }
}

impl From<Var> for LinExpr {
    fn from(v: Var) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl From<ScalarVar> for LinExpr {
    fn from(v: ScalarVar) -> Self {
        LinExpr::term(v, 1.0)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl AddAssign<&LinExpr> for LinExpr {
    fn add_assign(&mut self, rhs: &LinExpr) {
        self.add_scaled(rhs, 1.0);
    }
}

impl AddAssign for LinExpr {
    fn add_assign(&mut self, rhs: LinExpr) {
        self.terms.extend(rhs.terms);
        self.constant += rhs.constant;
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self += rhs;
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, rhs: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= rhs;
        }
        self.constant *= rhs;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_is_symmetric() {
        let b = PsdBlock { id: 3, dim: 4 };
        assert_eq!(b.entry(1, 2), b.entry(2, 1));
    }

    #[test]
    fn compaction_merges_and_drops_zeros() {
        let x = Var::Scalar(0);
        let y = Var::Scalar(1);
        let e = LinExpr::term(x, 2.0) + LinExpr::term(y, 1.0) - LinExpr::term(x, 2.0)
            + LinExpr::constant(3.0);
        let c = e.compacted();
        assert_eq!(c.terms(), &[(y, 1.0)]);
        assert_eq!(c.constant_term(), 3.0);
    }
}
