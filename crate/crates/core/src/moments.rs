//! Outer approximations of the correlated equilibrium set by truncated
//! moments.
//!
//! For each player `i` and test-polynomial half-degree `d`, the matrix
//! `M_i(t) = ∫ v(s_i) v(s_i)ᵀ [u_i(t, s₋ᵢ) − u_i(s)] dπ` with
//! `v = (1, s_i, …, s_i^d)` must be negative semidefinite for every
//! `t ∈ [−1, 1]`. Its entries are affine in the joint moments of `π`, which are
//! in turn constrained by moment and localizing matrices.

use crate::game::{GameError, PolynomialGame, SupportedDistribution};
use crate::poly::MultiPoly;
use crate::sos::{
    graded_monomials, matrix_psd_on_interval_constraint, moment_feasibility_constraint,
    BiformBlocks, MomentBlocks, MomentExprs, MomentVector, SosError, SymPolyMatrix,
};
use nalgebra::{DMatrix, DVector};
use polyce_conic::{
    ConicError, ConicProblem, ConicSolution, LinExpr, ScalarVar, SolveStatus, SolverOptions,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const SOLVER_TOL: f64 = 1e-8;
/// Accepted residual level for iterates returned after a stall; relaxations
/// with a single feasible point have no interior.
const NEAR_OPTIMAL_TOL: f64 = 1e-6;
/// Slack for membership decisions.
pub const MEMBERSHIP_TOL: f64 = 1e-6;
/// `t` samples used to cross-check and extract separating polynomials.
const T_SAMPLES: usize = 2001;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("moment half-order r = {r} too small for d = {d}: need 2r >= {needed}")]
    Order { d: u32, r: u32, needed: u32 },
    #[error("moment vector has {got_vars} variables and half-order {got_order}; expected {vars} and at least {order}")]
    Mismatch {
        vars: usize,
        order: u32,
        got_vars: usize,
        got_order: u32,
    },
    #[error("need at least 3 directions, got {0}")]
    Directions(usize),
    #[error("direction has {got} components for {expected} players")]
    DirectionLength { expected: usize, got: usize },
    #[error("solver finished with status {0:?}")]
    Solver(SolveStatus),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxationOrder {
    /// Half-degree of the test polynomials `p(s_i)²`.
    pub d: u32,
    /// Moments of total degree up to `2r` are variables.
    pub r: u32,
}

impl RelaxationOrder {
    /// Smallest `r ≥ 1` with `2r ≥ 2d + max_i deg(u_i)`.
    pub fn auto(game: &PolynomialGame, d: u32) -> Self {
        let needed = Self::needed(game, d);
        RelaxationOrder {
            d,
            r: needed.div_ceil(2).max(1),
        }
    }

    fn needed(game: &PolynomialGame, d: u32) -> u32 {
        2 * d
            + game
                .utilities()
                .iter()
                .map(MultiPoly::total_degree)
                .max()
                .unwrap_or(0)
    }

    pub fn validate(&self, game: &PolynomialGame) -> Result<(), MomentError> {
        let needed = Self::needed(game, self.d);
        if 2 * self.r < needed || self.r == 0 {
            return Err(MomentError::Order {
                d: self.d,
                r: self.r,
                needed: needed.max(2),
            });
        }
        Ok(())
    }
}

/// The relaxation program with handles to its moment variables.
pub struct Relaxation {
    pub order: RelaxationOrder,
    pub problem: ConicProblem,
    pub moments: BTreeMap<Vec<u32>, ScalarVar>,
    pub moment_blocks: MomentBlocks,
    /// Certificate blocks of `−M_i(t) ⪰ 0`, one per player.
    pub deviation_blocks: Vec<BiformBlocks>,
    /// `∫ u_i dπ` per player.
    pub payoffs: Vec<LinExpr>,
}

fn integral(exprs: &MomentExprs, f: &MultiPoly, shift: &[u32]) -> Result<LinExpr, SosError> {
    let mut e = LinExpr::new();
    for (exp, c) in f.terms() {
        let shifted: Vec<u32> = exp.iter().zip(shift).map(|(a, b)| a + b).collect();
        e.add_scaled(exprs.get(&shifted)?, c);
    }
    Ok(e)
}

/// `M_i(t)` as a matrix of polynomials in `t` with moment-affine coefficients.
fn deviation_matrix(
    game: &PolynomialGame,
    player: usize,
    d: u32,
    exprs: &MomentExprs,
) -> Result<SymPolyMatrix, SosError> {
    let n = game.num_players();
    let u = game.utility(player);
    let deg = u.degree_in(player) as usize;
    let dim = d as usize + 1;
    let mut m = SymPolyMatrix::zeros(dim);
    for a in 0..dim {
        for b in a..dim {
            let mut shift = vec![0u32; n];
            shift[player] = (a + b) as u32;
            let mut coeffs = vec![LinExpr::new(); deg + 1];
            for (exp, c) in u.terms() {
                // t^{e_i} ∫ s_i^{a+b} s₋ᵢ^{e₋ᵢ} dπ
                let mut e = exp.to_vec();
                let power = e[player] as usize;
                e[player] = 0;
                let mom: Vec<u32> = e.iter().zip(&shift).map(|(x, y)| x + y).collect();
                coeffs[power].add_scaled(exprs.get(&mom)?, c);
            }
            coeffs[0].add_scaled(&integral(exprs, u, &shift)?, -1.0);
            m.set(a, b, coeffs);
        }
    }
    Ok(m)
}

fn negated(m: &SymPolyMatrix) -> SymPolyMatrix {
    let mut out = SymPolyMatrix::zeros(m.dim());
    for a in 0..m.dim() {
        for b in a..m.dim() {
            out.set(a, b, m.get(a, b).iter().map(|c| c.clone() * -1.0).collect());
        }
    }
    out
}

fn add_deviation_constraints(
    problem: &mut ConicProblem,
    game: &PolynomialGame,
    d: u32,
    exprs: &MomentExprs,
) -> Result<Vec<BiformBlocks>, SosError> {
    (0..game.num_players())
        .map(|i| {
            let m = deviation_matrix(game, i, d, exprs)?;
            let degree = game.utility(i).degree_in(i) as usize;
            matrix_psd_on_interval_constraint(problem, &negated(&m), degree)
        })
        .collect()
}

pub fn build_relaxation(
    game: &PolynomialGame,
    order: RelaxationOrder,
) -> Result<Relaxation, MomentError> {
    order.validate(game)?;
    let n = game.num_players();
    let mut problem = ConicProblem::new();
    let (exprs, moments) = MomentExprs::variables(&mut problem, n, order.r);
    let moment_blocks = moment_feasibility_constraint(&mut problem, &exprs)?;
    let deviation_blocks = add_deviation_constraints(&mut problem, game, order.d, &exprs)?;
    let zero = vec![0; n];
    let payoffs = game
        .utilities()
        .iter()
        .map(|u| integral(&exprs, u, &zero))
        .collect::<Result<_, _>>()?;
    Ok(Relaxation {
        order,
        problem,
        moments,
        moment_blocks,
        deviation_blocks,
        payoffs,
    })
}

fn accept(sol: ConicSolution) -> Result<ConicSolution, MomentError> {
    let r = sol.residuals;
    let near = sol.status == SolveStatus::NumericalFailure
        && r.primal <= NEAR_OPTIMAL_TOL
        && r.dual <= NEAR_OPTIMAL_TOL
        && r.gap <= NEAR_OPTIMAL_TOL * (1.0 + sol.objective_value.abs());
    if sol.is_optimal() || near {
        Ok(sol)
    } else {
        Err(MomentError::Solver(sol.status))
    }
}

impl Relaxation {
    /// Maximizes `Σ w_i ∫ u_i dπ` and returns the payoff vector at the optimum.
    pub fn support_point(&self, direction: &[f64]) -> Result<Vec<f64>, MomentError> {
        if direction.len() != self.payoffs.len() {
            return Err(MomentError::DirectionLength {
                expected: self.payoffs.len(),
                got: direction.len(),
            });
        }
        let mut p = self.problem.clone();
        let mut obj = LinExpr::new();
        for (u, &w) in self.payoffs.iter().zip(direction) {
            obj.add_scaled(u, -w);
        }
        p.set_objective(obj)?;
        let sol = accept(p.solve(&SolverOptions::with_tol(SOLVER_TOL))?)?;
        Ok(self.payoffs.iter().map(|u| sol.eval(u)).collect())
    }

    fn extreme(&self, player: usize, sign: f64) -> Result<f64, MomentError> {
        let mut p = self.problem.clone();
        p.set_objective(self.payoffs[player].clone() * sign)?;
        let sol = accept(p.solve(&SolverOptions::with_tol(SOLVER_TOL))?)?;
        Ok(sol.eval(&self.payoffs[player]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn spread(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.min - tol && v <= self.max + tol
    }
}

/// Per-player bounds on expected utility over the relaxation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffBox {
    pub order: RelaxationOrder,
    pub players: Vec<String>,
    pub bounds: Vec<Interval>,
}

impl PayoffBox {
    pub fn contains(&self, payoffs: &[f64], tol: f64) -> bool {
        payoffs.len() == self.bounds.len()
            && self
                .bounds
                .iter()
                .zip(payoffs)
                .all(|(b, &v)| b.contains(v, tol))
    }

    /// Largest amount by which `self` sticks out of `outer`.
    pub fn excess_over(&self, outer: &PayoffBox) -> f64 {
        self.bounds
            .iter()
            .zip(&outer.bounds)
            .map(|(a, b)| (b.min - a.min).max(a.max - b.max).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("payoff box serializes")
    }
}

pub fn payoff_bounds(
    game: &PolynomialGame,
    order: RelaxationOrder,
) -> Result<PayoffBox, MomentError> {
    let relax = build_relaxation(game, order)?;
    let bounds = (0..game.num_players())
        .map(|i| {
            Ok(Interval {
                min: relax.extreme(i, 1.0)?,
                max: relax.extreme(i, -1.0)?,
            })
        })
        .collect::<Result<_, MomentError>>()?;
    Ok(PayoffBox {
        order,
        players: game.players().to_vec(),
        bounds,
    })
}

/// Support points of the projected relaxation in payoff space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionSketch {
    pub order: RelaxationOrder,
    pub players: Vec<String>,
    pub directions: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
}

impl RegionSketch {
    /// Columns `w_<player>` for the direction, then `u_<player>` for the point.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = self
            .players
            .iter()
            .map(|p| format!("w_{p}"))
            .chain(self.players.iter().map(|p| format!("u_{p}")))
            .collect();
        w.write_record(&header).expect("in-memory write");
        for (dir, pt) in self.directions.iter().zip(&self.points) {
            w.write_record(dir.iter().chain(pt).map(|v| format!("{v:.9}")))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// `K` unit directions: evenly spaced angles for two players, seeded Gaussian
/// directions otherwise.
pub fn sketch_directions(num_players: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    if num_players == 2 {
        return (0..k)
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| loop {
            let v: Vec<f64> = (0..num_players)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

pub fn payoff_region_sketch(
    game: &PolynomialGame,
    order: RelaxationOrder,
    k: usize,
    seed: u64,
) -> Result<RegionSketch, MomentError> {
    if k < 3 {
        return Err(MomentError::Directions(k));
    }
    let relax = build_relaxation(game, order)?;
    let directions = sketch_directions(game.num_players(), k, seed);
    let points = directions
        .iter()
        .map(|w| relax.support_point(w))
        .collect::<Result<_, _>>()?;
    Ok(RegionSketch {
        order,
        players: game.players().to_vec(),
        directions,
        points,
    })
}

/// A test polynomial `p(s_i)` and deviation `t` with
/// `∫ p(s_i)² [u_i(t, s₋ᵢ) − u_i(s)] dπ > 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub player: usize,
    pub t: f64,
    /// Ascending coefficients of `p`.
    pub p: Vec<f64>,
    /// The integral computed from the moments.
    pub value: f64,
}

impl Separation {
    /// The same integral evaluated directly against a finite distribution.
    pub fn integrate(&self, game: &PolynomialGame, dist: &SupportedDistribution) -> f64 {
        let u = game.utility(self.player);
        dist.support()
            .iter()
            .map(|(s, prob)| {
                let p = crate::poly::univariate::eval(&self.p, s[self.player]);
                let mut dev = s.clone();
                dev[self.player] = self.t;
                prob * p * p * (u.eval(&dev) - u.eval(s))
            })
            .sum()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Membership {
    pub member: bool,
    pub moment_min_eigenvalue: f64,
    pub localizing_min_eigenvalue: f64,
    /// Per player, the largest `m` with `−M_i(t) ⪰ m·I` on `[−1, 1]`, from an
    /// SDP.
    pub margins: Vec<f64>,
    /// The same quantity from sampling `t`; an upper bound on the margin.
    pub sampled_margins: Vec<f64>,
    pub separation: Option<Separation>,
}

fn const_value(e: &LinExpr) -> f64 {
    debug_assert!(e.is_constant());
    e.constant_term()
}

fn min_eig(rows: Vec<Vec<f64>>) -> f64 {
    let n = rows.len();
    if n == 0 {
        return f64::INFINITY;
    }
    DMatrix::from_fn(n, n, |a, b| rows[a][b])
        .symmetric_eigenvalues()
        .min()
}

fn eval_matrix(m: &SymPolyMatrix, t: f64) -> DMatrix<f64> {
    DMatrix::from_fn(m.dim(), m.dim(), |a, b| {
        m.get(a, b)
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + const_value(c))
    })
}

/// Checks whether fixed moments satisfy the relaxation.
pub fn check_moment_membership(
    game: &PolynomialGame,
    order: RelaxationOrder,
    mv: &MomentVector,
) -> Result<Membership, MomentError> {
    order.validate(game)?;
    let n = game.num_players();
    if mv.num_vars != n || mv.half_order < order.r {
        return Err(MomentError::Mismatch {
            vars: n,
            order: order.r,
            got_vars: mv.num_vars,
            got_order: mv.half_order,
        });
    }
    let exprs = mv.to_exprs();
    let value = |e: &[u32]| -> Result<f64, MomentError> { Ok(const_value(exprs.get(e)?)) };

    let basis = graded_monomials(n, order.r);
    let add = |a: &[u32], b: &[u32]| -> Vec<u32> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let mut rows = Vec::new();
    for a in &basis {
        rows.push(
            basis
                .iter()
                .map(|b| value(&add(a, b)))
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let moment_min = min_eig(rows);
    let loc_basis = graded_monomials(n, order.r - 1);
    let mut loc_min = f64::INFINITY;
    for i in 0..n {
        let mut two = vec![0; n];
        two[i] = 2;
        let mut rows = Vec::new();
        for a in &loc_basis {
            let mut row = Vec::new();
            for b in &loc_basis {
                let ab = add(a, b);
                row.push(value(&ab)? - value(&add(&ab, &two))?);
            }
            rows.push(row);
        }
        loc_min = loc_min.min(min_eig(rows));
    }
    let mass_ok = (value(&vec![0; n])? - 1.0).abs() <= MEMBERSHIP_TOL;

    let mut margins = Vec::with_capacity(n);
    let mut sampled = Vec::with_capacity(n);
    let mut separation: Option<Separation> = None;
    for i in 0..n {
        let m = deviation_matrix(game, i, order.d, &exprs)?;
        margins.push(interval_margin(
            &negated(&m),
            game.utility(i).degree_in(i) as usize,
        )?);

        // sampled minimum of λ_min(−M(t)) and the most violated t
        let (mut worst, mut worst_t) = (f64::INFINITY, -1.0);
        for k in 0..T_SAMPLES {
            let t = -1.0 + 2.0 * k as f64 / (T_SAMPLES - 1) as f64;
            let lam = -eval_matrix(&m, t).symmetric_eigenvalues().max();
            if lam < worst {
                worst = lam;
                worst_t = t;
            }
        }
        sampled.push(worst);
        if worst < -MEMBERSHIP_TOL && separation.as_ref().is_none_or(|s| -worst > s.value) {
            let eig = eval_matrix(&m, worst_t).symmetric_eigen();
            let top = eig.eigenvalues.imax();
            let v: DVector<f64> = eig.eigenvectors.column(top).into_owned();
            let mt = eval_matrix(&m, worst_t);
            separation = Some(Separation {
                player: i,
                t: worst_t,
                p: v.iter().copied().collect(),
                value: (v.transpose() * &mt * &v)[(0, 0)],
            });
        }
    }
    let member = mass_ok
        && moment_min >= -MEMBERSHIP_TOL
        && loc_min >= -MEMBERSHIP_TOL
        && margins.iter().all(|&m| m >= -MEMBERSHIP_TOL);
    Ok(Membership {
        member,
        moment_min_eigenvalue: moment_min,
        localizing_min_eigenvalue: loc_min,
        margins,
        sampled_margins: sampled,
        separation,
    })
}

/// `max m` such that `A(t) − m·I ⪰ 0` on `[−1, 1]` for a constant-coefficient
/// matrix polynomial `A`.
fn interval_margin(a: &SymPolyMatrix, degree: usize) -> Result<f64, MomentError> {
    let mut p = ConicProblem::new();
    let m = p.add_scalar_var();
    let mut shifted = SymPolyMatrix::zeros(a.dim());
    for r in 0..a.dim() {
        for c in r..a.dim() {
            let mut coeffs = a.get(r, c).to_vec();
            if r == c {
                if coeffs.is_empty() {
                    coeffs.push(LinExpr::new());
                }
                coeffs[0].add_term(m, -1.0);
            }
            shifted.set(r, c, coeffs);
        }
    }
    matrix_psd_on_interval_constraint(&mut p, &shifted, degree)?;
    p.set_objective(LinExpr::term(m, -1.0))?;
    let sol = accept(p.solve(&SolverOptions::with_tol(SOLVER_TOL))?)?;
    Ok(sol.scalar(m))
}
