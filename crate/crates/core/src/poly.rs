use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Sparse multivariate polynomial with real coefficients.
///
/// Terms map exponent tuples to coefficients; zero coefficients are never
/// stored and every tuple has length `num_vars`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly {
    num_vars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl MultiPoly {
    pub fn zero(num_vars: usize) -> Self {
        MultiPoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: f64) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(vec![0; num_vars], c);
        p
    }

    /// The coordinate polynomial `x_var`.
    pub fn var(num_vars: usize, var: usize) -> Self {
        let mut exp = vec![0; num_vars];
        exp[var] = 1;
        let mut p = Self::zero(num_vars);
        p.add_term(exp, 1.0);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeated tuples.
    ///
    /// Panics if a tuple has the wrong length; use [`MultiPoly::try_from_terms`]
    /// for untrusted input.
    pub fn from_terms(num_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        Self::try_from_terms(num_vars, terms).expect("exponent tuple length")
    }

    pub fn try_from_terms(
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, usize> {
        let mut p = Self::zero(num_vars);
        for (exp, c) in terms {
            if exp.len() != num_vars {
                return Err(exp.len());
            }
            p.add_term(exp, c);
        }
        Ok(p)
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Self::from_terms(
            1,
            coeffs.iter().enumerate().map(|(k, &c)| (vec![k as u32], c)),
        )
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: f64) {
        debug_assert_eq!(exp.len(), self.num_vars);
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                if c != 0.0 {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exp: &[u32]) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.num_vars);
        self.terms
            .iter()
            .map(|(e, &c)| c * monomial_value(e, point))
            .sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zero(self.num_vars);
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.clone(), c * s))
                .collect(),
        }
    }

    /// Coefficients in `x_var` (ascending) after fixing every other variable to
    /// `point[j]`; `point[var]` is ignored.
    pub fn restrict_to(&self, var: usize, point: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.degree_in(var) as usize + 1];
        for (e, &c) in &self.terms {
            let mut v = c;
            for (j, &k) in e.iter().enumerate() {
                if j != var {
                    v *= point[j].powi(k as i32);
                }
            }
            out[e[var] as usize] += v;
        }
        out
    }

    /// Dense ascending coefficients of a univariate polynomial.
    pub fn univariate_coeffs(&self) -> Vec<f64> {
        assert_eq!(self.num_vars, 1, "not univariate");
        let mut out = vec![0.0; self.degree_in(0) as usize + 1];
        for (e, &c) in &self.terms {
            out[e[0] as usize] += c;
        }
        out
    }
}

pub(crate) fn monomial_value(exp: &[u32], point: &[f64]) -> f64 {
    exp.iter()
        .zip(point)
        .fold(1.0, |acc, (&k, &x)| acc * x.powi(k as i32))
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (e, &c) in &rhs.terms {
            out.add_term(e.clone(), c);
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(-1.0)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = MultiPoly::zero(self.num_vars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &rhs.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

/// Helpers on dense ascending coefficient vectors.
pub mod univariate {
    /// Horner evaluation.
    pub fn eval(coeffs: &[f64], t: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect()
    }

    /// Drops trailing coefficients that are negligible relative to the largest.
    pub fn trimmed(coeffs: &[f64], rel_tol: f64) -> Vec<f64> {
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut out = coeffs.to_vec();
        while out.last().is_some_and(|c| c.abs() <= rel_tol * scale) {
            out.pop();
        }
        out
    }

    pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len().max(b.len())];
        for (i, &x) in a.iter().enumerate() {
            out[i] += x;
        }
        for (i, &y) in b.iter().enumerate() {
            out[i] += y;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_removes_terms() {
        let x = MultiPoly::var(2, 0);
        let d = &x - &x;
        assert!(d.is_zero());
    }

    #[test]
    fn product_and_restriction() {
        // (1 - x^2)(3y^2 + 6y + 5) at y = -1 is 2(1 - x^2)
        let one_minus_x2 = MultiPoly::from_terms(2, [(vec![0, 0], 1.0), (vec![2, 0], -1.0)]);
        let q = MultiPoly::from_terms(2, [(vec![0, 2], 3.0), (vec![0, 1], 6.0), (vec![0, 0], 5.0)]);
        let p = &one_minus_x2 * &q;
        assert_eq!(p.restrict_to(0, &[0.0, -1.0]), vec![2.0, 0.0, -2.0]);
        assert_eq!(p.total_degree(), 4);
        assert_eq!(p.degree_in(1), 2);
    }

    #[test]
    fn horner_matches_term_sum() {
        let c = [1.0, -2.0, 0.5, 3.0];
        let p = MultiPoly::univariate(&c);
        for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            assert!((univariate::eval(&c, t) - p.eval(&[t])).abs() < 1e-14);
        }
    }
}
