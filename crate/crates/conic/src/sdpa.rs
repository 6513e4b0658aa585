//! Plain-text dump of a built problem, for cross-checking with other solvers.
//!
//! The format is line oriented and whitespace separated, with 0-based indices:
//!
//! ```text
//! * comment
//! scalars <n>
//! blocks <d_0> <d_1> ...
//! objective <constant>
//! c <var> <coef>            one line per objective term
//! eq <k> <rhs>              one line per equality, followed by its terms
//! a <k> <var> <coef>
//! ```
//!
//! `<var>` is `s <i>` for a free scalar or `b <block> <row> <col>` (row ≥ col)
//! for a block entry. Off-diagonal coefficients multiply the single entry
//! `X_row,col`, so the SDPA matrix element is half the coefficient.

use crate::expr::Var;
use crate::problem::ConicProblem;
use std::fmt::Write;

fn var_token(v: Var) -> String {
    match v {
        Var::Scalar(i) => format!("s {i}"),
        Var::Entry { block, row, col } => format!("b {block} {row} {col}"),
    }
}

/// Renders `problem` in the dump format described in the module docs.
pub fn dump(problem: &ConicProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* polyce conic problem");
    let _ = writeln!(out, "scalars {}", problem.num_scalars());
    let dims: Vec<String> = problem.block_dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "blocks {}", dims.join(" ").trim_end());
    let _ = writeln!(out, "objective {:e}", problem.objective().constant_term());
    for &(v, c) in problem.objective().terms() {
        let _ = writeln!(out, "c {} {:e}", var_token(v), c);
    }
    for (k, eq) in problem.equalities().iter().enumerate() {
        let _ = writeln!(out, "eq {k} {:e}", eq.rhs);
        for &(v, c) in &eq.terms {
            let _ = writeln!(out, "a {k} {} {:e}", var_token(v), c);
        }
    }
    out
}
