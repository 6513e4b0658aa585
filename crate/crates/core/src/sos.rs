//! Gram-matrix encodings of polynomial nonnegativity and moment validity.
//!
//! Polynomials are written in the monomial basis with ascending coefficients.
//! A Gram block `Q` represents `Σ_{i,j} Q_ij x^{i+j}`, so the coefficient of
//! `x^k` is the antidiagonal sum `Σ_{i+j=k} Q_ij`.

use crate::poly::univariate;
use nalgebra::DMatrix;
use polyce_conic::{ConicError, ConicProblem, ConicSolution, LinExpr, PsdBlock, ScalarVar};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SosError {
    #[error("polynomial of degree {degree} does not fit a Gram basis of degree {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("moment relaxation order must be at least 1")]
    OrderTooLow,
    #[error("moment vector is missing exponent {0:?}")]
    MissingMoment(Vec<u32>),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// Degree of a coefficient list, ignoring trailing identically-zero entries.
fn effective_degree(coeffs: &[LinExpr]) -> usize {
    coeffs
        .iter()
        .rposition(|c| !(c.is_constant() && c.constant_term() == 0.0))
        .unwrap_or(0)
}

/// `Σ_{i+j=k} Q_ij` over a `(dim × dim)` block.
fn antidiagonal(q: PsdBlock, k: usize) -> LinExpr {
    let dim = q.dim();
    let mut e = LinExpr::new();
    for i in k.saturating_sub(dim - 1)..=k.min(dim - 1) {
        e.add_term(q.entry(i, k - i), 1.0);
    }
    e
}

fn coeff(coeffs: &[LinExpr], k: usize) -> LinExpr {
    coeffs.get(k).cloned().unwrap_or_default()
}

/// Constrains the polynomial with the given affine coefficients to be a sum of
/// squares of polynomials of degree `half_degree`.
pub fn gram_constraint(
    problem: &mut ConicProblem,
    coeffs: &[LinExpr],
    half_degree: usize,
) -> Result<PsdBlock, SosError> {
    let degree = effective_degree(coeffs);
    if degree > 2 * half_degree {
        return Err(SosError::DegreeTooHigh {
            degree,
            max: 2 * half_degree,
        });
    }
    let q = problem.add_psd_block(half_degree + 1)?;
    for k in 0..=2 * half_degree {
        problem.add_equality(antidiagonal(q, k) - coeff(coeffs, k), 0.0)?;
    }
    Ok(q)
}

/// Half-degrees of the Gram bases of `s` and `t` in `p = s + (1 − x²) t` for a
/// target of degree `degree`: `s` uses monomials up to `⌈D/2⌉` and `t` up to
/// `⌈D/2⌉ − 1`, with `t` absent for constants.
pub fn lukacs_half_degrees(degree: usize) -> (usize, Option<usize>) {
    let hs = degree.div_ceil(2);
    (hs, hs.checked_sub(1).filter(|_| degree > 0))
}

/// Gram blocks of an interval-nonnegativity certificate.
#[derive(Clone, Copy, Debug)]
pub struct LukacsBlocks {
    pub s: PsdBlock,
    pub t: Option<PsdBlock>,
    pub degree: usize,
}

/// Constrains the polynomial to be nonnegative on `[-1, 1]` via
/// `p = s + (1 − x²) t` with `s`, `t` sums of squares.
pub fn interval_nonneg_constraint(
    problem: &mut ConicProblem,
    coeffs: &[LinExpr],
    degree: usize,
) -> Result<LukacsBlocks, SosError> {
    let actual = effective_degree(coeffs);
    if actual > degree {
        return Err(SosError::DegreeTooHigh {
            degree: actual,
            max: degree,
        });
    }
    let (hs, ht) = lukacs_half_degrees(degree);
    let s = problem.add_psd_block(hs + 1)?;
    let t = ht.map(|h| problem.add_psd_block(h + 1)).transpose()?;
    for k in 0..=2 * hs {
        let mut e = antidiagonal(s, k);
        if let Some(t) = t {
            if k <= 2 * (t.dim() - 1) {
                e += antidiagonal(t, k);
            }
            if k >= 2 && k - 2 <= 2 * (t.dim() - 1) {
                e.add_scaled(&antidiagonal(t, k - 2), -1.0);
            }
        }
        problem.add_equality(e - coeff(coeffs, k), 0.0)?;
    }
    Ok(LukacsBlocks { s, t, degree })
}

/// Symmetric matrix of univariate polynomials in `t` with affine coefficients.
/// Only the upper triangle is stored, which makes the matrix symmetric by
/// construction.
#[derive(Clone, Debug)]
pub struct SymPolyMatrix {
    dim: usize,
    upper: Vec<Vec<LinExpr>>,
}

impl SymPolyMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymPolyMatrix {
            dim,
            upper: vec![Vec::new(); dim * (dim + 1) / 2],
        }
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * self.dim - a * (a + 1) / 2 + b
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, a: usize, b: usize) -> &[LinExpr] {
        &self.upper[self.slot(a, b)]
    }

    /// Sets entries `(a, b)` and `(b, a)`.
    pub fn set(&mut self, a: usize, b: usize, coeffs: Vec<LinExpr>) {
        let k = self.slot(a, b);
        self.upper[k] = coeffs;
    }

    pub fn from_constant(rows: &[Vec<Vec<f64>>]) -> Self {
        let mut m = Self::zeros(rows.len());
        for a in 0..rows.len() {
            for b in a..rows.len() {
                m.set(
                    a,
                    b,
                    rows[a][b].iter().map(|&c| LinExpr::constant(c)).collect(),
                );
            }
        }
        m
    }

    pub fn degree(&self) -> usize {
        self.upper
            .iter()
            .map(|c| effective_degree(c))
            .max()
            .unwrap_or(0)
    }
}

/// Gram blocks of a biform certificate, with basis element `x_a t^j` at index
/// `a·(h + 1) + j` for half-degree `h`.
#[derive(Clone, Copy, Debug)]
pub struct BiformBlocks {
    pub s: PsdBlock,
    pub t: Option<PsdBlock>,
    pub dim: usize,
    pub s_half: usize,
    pub t_half: Option<usize>,
}

/// `Σ_{j+l=k} G[(a,j),(b,l)]` for a biform Gram block with half-degree `h`.
fn biform_coefficient(g: PsdBlock, h: usize, a: usize, b: usize, k: usize) -> LinExpr {
    let mut e = LinExpr::new();
    if k > 2 * h {
        return e;
    }
    for j in k.saturating_sub(h)..=k.min(h) {
        e.add_term(g.entry(a * (h + 1) + j, b * (h + 1) + k - j), 1.0);
    }
    e
}

/// Constrains `M(t) ⪰ 0` for all `t ∈ [-1, 1]` via the biform identity
/// `xᵀM(t)x = S(x, t) + (1 − t²) T(x, t)` with `S`, `T` sums of squares in the
/// basis `x_a t^j`.
pub fn matrix_psd_on_interval_constraint(
    problem: &mut ConicProblem,
    m: &SymPolyMatrix,
    degree: usize,
) -> Result<BiformBlocks, SosError> {
    let actual = m.degree();
    if actual > degree {
        return Err(SosError::DegreeTooHigh {
            degree: actual,
            max: degree,
        });
    }
    let dim = m.dim();
    let (hs, ht) = lukacs_half_degrees(degree);
    let s = problem.add_psd_block(dim * (hs + 1))?;
    let t = ht
        .map(|h| problem.add_psd_block(dim * (h + 1)))
        .transpose()?;
    for a in 0..dim {
        for b in a..dim {
            let target = m.get(a, b);
            for k in 0..=2 * hs {
                let mut e = biform_coefficient(s, hs, a, b, k);
                if let (Some(t), Some(h)) = (t, ht) {
                    e += biform_coefficient(t, h, a, b, k);
                    if k >= 2 {
                        e.add_scaled(&biform_coefficient(t, h, a, b, k - 2), -1.0);
                    }
                }
                problem.add_equality(e - coeff(target, k), 0.0)?;
            }
        }
    }
    Ok(BiformBlocks {
        s,
        t,
        dim,
        s_half: hs,
        t_half: ht,
    })
}

/// Exponent tuples in `n` variables of total degree `≤ max_degree`, in graded
/// lexicographic order: by total degree, then with larger leading exponents
/// first, so `(1,0)` precedes `(0,1)`.
pub fn graded_monomials(n: usize, max_degree: u32) -> Vec<Vec<u32>> {
    fn fill(n: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(deg);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=deg).rev() {
            prefix.push(e);
            fill(n, deg - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Vec::new());
        return out;
    }
    for d in 0..=max_degree {
        fill(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

fn add_exp(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Truncated moments `∫ s^α dπ`, `|α| ≤ 2r`, of a measure on `[-1, 1]^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub num_vars: usize,
    /// Half-order `r`; moments go up to total degree `2r`.
    pub half_order: u32,
    /// Whether `μ_0 = 1` is required.
    pub probability: bool,
    #[serde(with = "moment_map")]
    pub values: BTreeMap<Vec<u32>, f64>,
}

mod moment_map {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        exp: Vec<u32>,
        value: f64,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vec<u32>, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(e, &v)| Entry {
                exp: e.clone(),
                value: v,
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<Vec<u32>, f64>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?
            .into_iter()
            .map(|e| (e.exp, e.value))
            .collect())
    }
}

impl MomentVector {
    /// Moments of a finitely supported probability measure.
    pub fn from_atoms(num_vars: usize, half_order: u32, atoms: &[(Vec<f64>, f64)]) -> Self {
        let values = graded_monomials(num_vars, 2 * half_order)
            .into_iter()
            .map(|e| {
                let v = atoms
                    .iter()
                    .map(|(s, p)| p * crate::poly::monomial_value(&e, s))
                    .sum();
                (e, v)
            })
            .collect();
        MomentVector {
            num_vars,
            half_order,
            probability: true,
            values,
        }
    }

    pub fn get(&self, exp: &[u32]) -> Option<f64> {
        self.values.get(exp).copied()
    }

    pub fn to_exprs(&self) -> MomentExprs {
        MomentExprs {
            num_vars: self.num_vars,
            half_order: self.half_order,
            probability: self.probability,
            values: self
                .values
                .iter()
                .map(|(e, &v)| (e.clone(), LinExpr::constant(v)))
                .collect(),
        }
    }
}

/// Moments as affine expressions in problem variables.
#[derive(Clone, Debug)]
pub struct MomentExprs {
    pub num_vars: usize,
    pub half_order: u32,
    pub probability: bool,
    pub values: BTreeMap<Vec<u32>, LinExpr>,
}

impl MomentExprs {
    /// One free scalar per moment of total degree `≤ 2r`.
    pub fn variables(
        problem: &mut ConicProblem,
        num_vars: usize,
        half_order: u32,
    ) -> (Self, BTreeMap<Vec<u32>, ScalarVar>) {
        let mut vars = BTreeMap::new();
        let mut values = BTreeMap::new();
        for e in graded_monomials(num_vars, 2 * half_order) {
            let v = problem.add_scalar_var();
            values.insert(e.clone(), LinExpr::from(v));
            vars.insert(e, v);
        }
        (
            MomentExprs {
                num_vars,
                half_order,
                probability: true,
                values,
            },
            vars,
        )
    }

    pub fn get(&self, exp: &[u32]) -> Result<&LinExpr, SosError> {
        self.values
            .get(exp)
            .ok_or_else(|| SosError::MissingMoment(exp.to_vec()))
    }
}

/// Moment matrix and localizing blocks added for a moment vector.
#[derive(Clone, Debug)]
pub struct MomentBlocks {
    pub moment: PsdBlock,
    /// One block per variable, for the weight `1 − s_i²`.
    pub localizing: Vec<PsdBlock>,
    pub basis: Vec<Vec<u32>>,
    pub localizing_basis: Vec<Vec<u32>>,
}

/// Ties a PSD block to a symmetric matrix of affine expressions.
fn link_block(problem: &mut ConicProblem, entries: &[Vec<LinExpr>]) -> Result<PsdBlock, SosError> {
    let n = entries.len();
    let blk = problem.add_psd_block(n)?;
    for a in 0..n {
        for b in 0..=a {
            problem.add_equality(LinExpr::from(blk.entry(a, b)) - entries[a][b].clone(), 0.0)?;
        }
    }
    Ok(blk)
}

/// Necessary conditions for the moments to come from a measure on
/// `[-1, 1]^n`: the order-`r` moment matrix and the order-`(r−1)` localizing
/// matrices of `1 − s_i²` are PSD, and `μ_0 = 1` for probability measures.
pub fn moment_feasibility_constraint(
    problem: &mut ConicProblem,
    mv: &MomentExprs,
) -> Result<MomentBlocks, SosError> {
    let r = mv.half_order;
    if r < 1 {
        return Err(SosError::OrderTooLow);
    }
    let n = mv.num_vars;
    let basis = graded_monomials(n, r);
    let mut mm = Vec::with_capacity(basis.len());
    for a in &basis {
        let mut row = Vec::with_capacity(basis.len());
        for b in &basis {
            row.push(mv.get(&add_exp(a, b))?.clone());
        }
        mm.push(row);
    }
    let moment = link_block(problem, &mm)?;

    let localizing_basis = graded_monomials(n, r - 1);
    let mut localizing = Vec::with_capacity(n);
    for i in 0..n {
        let mut two = vec![0; n];
        two[i] = 2;
        let mut loc = Vec::with_capacity(localizing_basis.len());
        for a in &localizing_basis {
            let mut row = Vec::with_capacity(localizing_basis.len());
            for b in &localizing_basis {
                let ab = add_exp(a, b);
                row.push(mv.get(&ab)?.clone() - mv.get(&add_exp(&ab, &two))?.clone());
            }
            loc.push(row);
        }
        localizing.push(link_block(problem, &loc)?);
    }
    if mv.probability {
        problem.add_equality(mv.get(&vec![0; n])?.clone(), 1.0)?;
    }
    Ok(MomentBlocks {
        moment,
        localizing,
        basis,
        localizing_basis,
    })
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Gram matrices witnessing `p = s + (1 − x²) t` on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosCertificate {
    pub degree: usize,
    /// Row-major Gram matrix of `s`.
    pub gram_s: Vec<Vec<f64>>,
    /// Row-major Gram matrix of `t`, absent for constants.
    pub gram_t: Option<Vec<Vec<f64>>>,
}

fn antidiagonal_sums(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    let mut out = vec![0.0; (2 * n).saturating_sub(1)];
    for (i, row) in q.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[i + j] += v;
        }
    }
    out
}

fn min_eigenvalue(q: &[Vec<f64>]) -> f64 {
    if q.is_empty() {
        return f64::INFINITY;
    }
    let n = q.len();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (q[i][j] + q[j][i]));
    m.symmetric_eigenvalues().min()
}

impl SosCertificate {
    pub fn from_solution(sol: &ConicSolution, blocks: &LukacsBlocks) -> Self {
        SosCertificate {
            degree: blocks.degree,
            gram_s: matrix_rows(sol.block(blocks.s)),
            gram_t: blocks.t.map(|t| matrix_rows(sol.block(t))),
        }
    }

    /// Ascending coefficients of `s + (1 − x²) t`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let s = antidiagonal_sums(&self.gram_s);
        match &self.gram_t {
            None => s,
            Some(t) => {
                let t = antidiagonal_sums(t);
                univariate::add(&s, &univariate::mul(&[1.0, 0.0, -1.0], &t))
            }
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let s = min_eigenvalue(&self.gram_s);
        self.gram_t
            .as_deref()
            .map_or(s, |t| s.min(min_eigenvalue(t)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateCheck {
    pub valid: bool,
    /// Largest coefficient mismatch between the reconstruction and the target.
    pub residual: f64,
    pub min_eigenvalue: f64,
    /// Smallest target value over 101 uniform points of `[-1, 1]`.
    pub min_sample: f64,
}

/// Checks Gram PSD-ness (to `1e-7`), coefficient agreement (to `1e-7`) and
/// nonnegativity of the target on a 101-point grid (to `-1e-6`).
pub fn verify_certificate(cert: &SosCertificate, target: &[f64]) -> CertificateCheck {
    let rec = cert.reconstruct();
    let len = rec.len().max(target.len());
    let residual = (0..len)
        .map(|k| (rec.get(k).copied().unwrap_or(0.0) - target.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let min_eig = cert.min_eigenvalue();
    let min_sample = (0..=100)
        .map(|k| univariate::eval(target, -1.0 + 0.02 * k as f64))
        .fold(f64::INFINITY, f64::min);
    CertificateCheck {
        valid: min_eig >= -1e-7 && residual <= 1e-7 && min_sample >= -1e-6,
        residual,
        min_eigenvalue: min_eig,
        min_sample,
    }
}

/// Constant affine coefficients.
pub fn constant_coeffs(c: &[f64]) -> Vec<LinExpr> {
    c.iter().map(|&v| LinExpr::constant(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order_is_frozen() {
        let m = graded_monomials(2, 2);
        assert_eq!(
            m,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
        assert_eq!(graded_monomials(3, 3).len(), 20);
    }

    #[test]
    fn lukacs_basis_sizes() {
        assert_eq!(lukacs_half_degrees(0), (0, None));
        assert_eq!(lukacs_half_degrees(1), (1, Some(0)));
        assert_eq!(lukacs_half_degrees(2), (1, Some(0)));
        assert_eq!(lukacs_half_degrees(3), (2, Some(1)));
        assert_eq!(lukacs_half_degrees(4), (2, Some(1)));
    }

    #[test]
    fn sym_poly_matrix_is_symmetric() {
        let mut m = SymPolyMatrix::zeros(3);
        m.set(2, 0, constant_coeffs(&[1.0, 2.0]));
        assert_eq!(m.get(0, 2), m.get(2, 0));
        assert_eq!(m.degree(), 1);
    }
}
