//! Adaptive discretization: alternate between an SDP over a finite support and
//! adding the deviations that gain the most against its solution.

use crate::game::{FiniteGame, GameError, PolynomialGame, ProductGrid, SupportedDistribution};
use crate::maximize::{maximize_univariate, TIE_TOL};
use crate::sos::{interval_nonneg_constraint, LukacsBlocks, SosError};
use polyce_conic::{
    ConicError, ConicProblem, ConicSolution, LinExpr, ScalarVar, SolveStatus, SolverOptions, Var,
};
use serde::Serialize;
use std::fmt::Write;
use thiserror::Error;

const NEAR_OPTIMAL_TOL: f64 = 1e-6;
/// Tied maximizers must also come within this fraction of the gain.
const TIE_FRACTION: f64 = 1e-2;
/// Target violation of the restricted rows after projection.
const PROJECTION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AdaptiveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("iteration {iteration}: solver finished with status {status:?}")]
    Solver {
        iteration: usize,
        status: SolveStatus,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptiveConfig {
    /// Slack on restricted deviations: `π^k` must be an `αε^k`-equilibrium when
    /// deviations stay on the current grid.
    pub alpha: f64,
    /// Added strategies must gain at least `βε^k` in total.
    pub beta: f64,
    pub eps_stop: f64,
    /// Maximum number of SDP solves.
    pub max_iter: usize,
    pub merge_tol: f64,
    /// Allows `α = β`, where convergence can fail.
    pub degenerate: bool,
    /// Relative tolerance for the optimal value `ε^k`.
    pub solver_tol: f64,
    /// `π^k` is taken from the interior-point iterate at this looser tolerance,
    /// which sits near the center of the optimal face when it is not a point.
    pub center_tol: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            alpha: 0.0,
            beta: 1.0,
            eps_stop: 1e-6,
            max_iter: 50,
            merge_tol: 1e-6,
            degenerate: false,
            solver_tol: 1e-9,
            center_tol: 1e-6,
        }
    }
}

impl AdaptiveConfig {
    /// The non-convergent `α = β = 1` variant.
    pub fn degenerate() -> Self {
        AdaptiveConfig {
            alpha: 1.0,
            beta: 1.0,
            degenerate: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), AdaptiveError> {
        let bad = |m: &str| Err(AdaptiveError::Config(m.to_string()));
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return bad("alpha and beta must lie in [0, 1]");
        }
        if self.degenerate {
            if self.alpha > self.beta {
                return bad("degenerate mode needs alpha <= beta");
            }
        } else if self.alpha >= self.beta || self.beta <= 0.0 {
            return bad("need 0 <= alpha < beta <= 1 (set the degenerate flag for alpha = beta)");
        }
        if !(self.eps_stop >= 0.0) || !(self.merge_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if !(self.solver_tol > 0.0 && self.solver_tol <= 1e-2)
            || !(self.center_tol > 0.0 && self.center_tol <= 1e-2)
        {
            return bad("solver tolerances must lie in (0, 1e-2]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AdaptiveStatus {
    Converged,
    MaxIterations,
    /// No strategy reaching the `β` threshold could be added.
    Stalled,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub grids: Vec<Vec<f64>>,
    /// `C̃ᵢ^k \ C̃ᵢ^{k−1}` per player; the initial grids for `k = 0`.
    pub new_strategies: Vec<Vec<f64>>,
    pub distribution: SupportedDistribution,
    /// Optimal value of the iteration SDP.
    pub epsilon: f64,
    /// Exact `ε` of the distribution against the full strategy sets.
    pub audited_epsilon: f64,
    /// Exact `Σ_{sᵢ} ε_{i,sᵢ}` per player.
    pub per_player: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationTrace {
    pub iterations: Vec<IterationRecord>,
    pub status: AdaptiveStatus,
}

impl IterationTrace {
    pub fn last(&self) -> &IterationRecord {
        self.iterations.last().expect("at least one iteration")
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.epsilon).collect()
    }

    /// Plain-text table: `k`, `ε^k`, then the new strategies of each player.
    pub fn table(&self, players: &[String]) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:>3} | {:>12}", "k", "eps");
        for p in players {
            let _ = write!(out, " | new {p:<18}");
        }
        out.push('\n');
        for r in &self.iterations {
            let _ = write!(out, "{:>3} | {:>12.6e}", r.k, r.epsilon);
            for s in &r.new_strategies {
                let set: Vec<String> = s.iter().map(|v| format!("{v:.4}")).collect();
                let _ = write!(out, " | {:<22}", format!("{{{}}}", set.join(", ")));
            }
            out.push('\n');
        }
        let _ = writeln!(out, "status: {:?}", self.status);
        out
    }
}

/// Gains `uᵢ(t, s₋ᵢ) − uᵢ(s)` and best responses for one kind of game.
trait DeviationOracle {
    fn num_players(&self) -> usize;

    /// Adds `ε_{i,sᵢ} ≥ Σ_{s₋ᵢ} π(s) [uᵢ(t, s₋ᵢ) − uᵢ(s)]` for every deviation
    /// `t` of the full strategy set.
    fn add_full_deviation_constraint(
        &self,
        p: &mut ConicProblem,
        grid: &ProductGrid,
        pi: &[Var],
        player: usize,
        recommended: usize,
        eps: ScalarVar,
    ) -> Result<Option<LukacsBlocks>, AdaptiveError>;

    fn gain(&self, grid: &ProductGrid, cell: usize, player: usize, t: f64) -> f64;

    /// Exact `max_t g_{i,sᵢ}(t)` and the maximizers within the tie tolerance,
    /// each with its gain.
    fn best_deviation(
        &self,
        dist: &SupportedDistribution,
        player: usize,
        s_i: f64,
    ) -> Result<(f64, Vec<(f64, f64)>), AdaptiveError>;
}

struct PolyOracle<'a>(&'a PolynomialGame);

impl DeviationOracle for PolyOracle<'_> {
    fn num_players(&self) -> usize {
        self.0.num_players()
    }

    fn add_full_deviation_constraint(
        &self,
        p: &mut ConicProblem,
        grid: &ProductGrid,
        pi: &[Var],
        player: usize,
        recommended: usize,
        eps: ScalarVar,
    ) -> Result<Option<LukacsBlocks>, AdaptiveError> {
        let u = self.0.utility(player);
        let degree = u.degree_in(player) as usize;
        // coefficients of ε_{i,sᵢ} − g_{i,sᵢ}(t), affine in π
        let mut coeffs = vec![LinExpr::new(); degree + 1];
        coeffs[0].add_term(eps, 1.0);
        for (k, &v) in pi.iter().enumerate() {
            let idx = grid.multi_index(k);
            if idx[player] != recommended {
                continue;
            }
            let s = grid.point(k);
            let restricted = u.restrict_to(player, &s);
            let here = crate::poly::univariate::eval(&restricted, s[player]);
            for (j, &c) in restricted.iter().enumerate() {
                coeffs[j].add_term(v, -c);
            }
            coeffs[0].add_term(v, here);
        }
        Ok(Some(interval_nonneg_constraint(p, &coeffs, degree)?))
    }

    fn gain(&self, grid: &ProductGrid, cell: usize, player: usize, t: f64) -> f64 {
        let mut s = grid.point(cell);
        let u = self.0.utility(player);
        let here = u.eval(&s);
        s[player] = t;
        u.eval(&s) - here
    }

    fn best_deviation(
        &self,
        dist: &SupportedDistribution,
        player: usize,
        s_i: f64,
    ) -> Result<(f64, Vec<(f64, f64)>), AdaptiveError> {
        let g = self.0.deviation_gain_coeffs(player, dist, s_i)?;
        let m = maximize_univariate(&g);
        let ties = m
            .maximizers
            .iter()
            .map(|&t| (t, crate::poly::univariate::eval(&g, t)))
            .collect();
        Ok((m.value, ties))
    }
}

struct FiniteOracle<'a>(&'a FiniteGame);

impl FiniteOracle<'_> {
    fn full_index(&self, point: &[f64]) -> Vec<usize> {
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                self.0
                    .grid()
                    .position(i, v)
                    .expect("subgrid points belong to the game")
            })
            .collect()
    }
}

impl DeviationOracle for FiniteOracle<'_> {
    fn num_players(&self) -> usize {
        self.0.num_players()
    }

    fn add_full_deviation_constraint(
        &self,
        p: &mut ConicProblem,
        grid: &ProductGrid,
        pi: &[Var],
        player: usize,
        recommended: usize,
        eps: ScalarVar,
    ) -> Result<Option<LukacsBlocks>, AdaptiveError> {
        for &t in self.0.grid().axis(player) {
            // ε_{i,sᵢ} − Σ π(s) gain(s, t) − w = 0 with w ≥ 0
            let mut e = LinExpr::term(eps, 1.0);
            for (k, &v) in pi.iter().enumerate() {
                if grid.multi_index(k)[player] == recommended {
                    e.add_term(v, -self.gain(grid, k, player, t));
                }
            }
            let w = p.add_nonneg_var();
            e.add_term(w, -1.0);
            p.add_equality(e, 0.0)?;
        }
        Ok(None)
    }

    fn gain(&self, grid: &ProductGrid, cell: usize, player: usize, t: f64) -> f64 {
        let mut idx = self.full_index(&grid.point(cell));
        let here = self.0.payoff(player, &idx);
        idx[player] = self
            .0
            .grid()
            .position(player, t)
            .expect("deviation is a strategy of the game");
        self.0.payoff(player, &idx) - here
    }

    fn best_deviation(
        &self,
        dist: &SupportedDistribution,
        player: usize,
        s_i: f64,
    ) -> Result<(f64, Vec<(f64, f64)>), AdaptiveError> {
        let grid = dist.grid();
        let a = grid
            .position(player, s_i)
            .ok_or(GameError::NotAGridPoint { player, value: s_i })?;
        let gains: Vec<f64> = self
            .0
            .grid()
            .axis(player)
            .iter()
            .map(|&t| {
                (0..grid.len())
                    .filter(|&k| grid.multi_index(k)[player] == a)
                    .map(|k| dist.probs()[k] * self.gain(grid, k, player, t))
                    .sum()
            })
            .collect();
        let best = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties = self
            .0
            .grid()
            .axis(player)
            .iter()
            .zip(&gains)
            .filter(|(_, &g)| g >= best - TIE_TOL)
            .map(|(&t, &g)| (t, g))
            .collect();
        Ok((best, ties))
    }
}

/// The iteration program and handles to its variables.
pub struct IterationSdp {
    pub problem: ConicProblem,
    pub grid: ProductGrid,
    /// Probability of each cell of `grid`, as a 1×1 block entry.
    pub pi: Vec<Var>,
    pub epsilon: ScalarVar,
    /// `ε_{i,sᵢ}` per player and grid point.
    pub eps_rec: Vec<Vec<ScalarVar>>,
    /// Interval certificates of `ε_{i,sᵢ} − g_{i,sᵢ}`, polynomial games only.
    pub certificates: Vec<Vec<LukacsBlocks>>,
    /// With `α = 0`, the restricted incentive rows `Σ_k c_k π_k ≤ 0` over
    /// cell indices.
    pub restricted_rows: Vec<Vec<(usize, f64)>>,
}

fn build_sdp(
    oracle: &dyn DeviationOracle,
    grid: &ProductGrid,
    alpha: f64,
) -> Result<IterationSdp, AdaptiveError> {
    let n = oracle.num_players();
    let mut p = ConicProblem::new();
    let pi: Vec<Var> = (0..grid.len()).map(|_| p.add_nonneg_var()).collect();
    let epsilon = p.add_scalar_var();
    let mut eps_rec = Vec::with_capacity(n);
    let mut certificates = Vec::with_capacity(n);
    let mut restricted_rows = Vec::new();

    for player in 0..n {
        let m = grid.axis(player).len();
        let vars = p.add_scalar_vars(m);
        let mut certs = Vec::new();
        for (a, &e) in vars.iter().enumerate() {
            if let Some(c) =
                oracle.add_full_deviation_constraint(&mut p, grid, &pi, player, a, e)?
            {
                certs.push(c);
            }
        }
        // ε − Σ ε_{i,sᵢ} ≥ 0
        let mut total = LinExpr::term(epsilon, 1.0);
        for &e in &vars {
            total.add_term(e, -1.0);
        }
        let slack = p.add_nonneg_var();
        total.add_term(slack, -1.0);
        p.add_equality(total, 0.0)?;

        if alpha < 1.0 {
            restricted_rows.extend(add_restricted_constraints(
                &mut p, oracle, grid, &pi, player, alpha, epsilon,
            )?);
        }
        eps_rec.push(vars);
        certificates.push(certs);
    }

    let mut simplex = LinExpr::new();
    for &v in &pi {
        simplex.add_term(v, 1.0);
    }
    p.add_equality(simplex, 1.0)?;
    p.set_objective(epsilon)?;
    Ok(IterationSdp {
        problem: p,
        grid: grid.clone(),
        pi,
        epsilon,
        eps_rec,
        certificates,
        restricted_rows,
    })
}

/// `π` is an `αε`-equilibrium for deviations within the grid: with `α = 0`,
/// every restricted incentive constraint holds exactly; otherwise per-
/// recommendation budgets `ε'_{i,sᵢ} ≥ 0` bound the restricted gains and sum
/// to at most `αε`. Returns the rows added with `α = 0`.
fn add_restricted_constraints(
    p: &mut ConicProblem,
    oracle: &dyn DeviationOracle,
    grid: &ProductGrid,
    pi: &[Var],
    player: usize,
    alpha: f64,
    epsilon: ScalarVar,
) -> Result<Vec<Vec<(usize, f64)>>, AdaptiveError> {
    let axis = grid.axis(player).to_vec();
    let mut budget_sum = LinExpr::new();
    let mut rows = Vec::new();
    for a in 0..axis.len() {
        let budget = (alpha > 0.0).then(|| p.add_nonneg_var());
        if let Some(b) = budget {
            budget_sum.add_term(b, 1.0);
        }
        for (b_idx, &t) in axis.iter().enumerate() {
            if b_idx == a {
                continue;
            }
            let mut e = LinExpr::new();
            let mut row = Vec::new();
            for (k, &v) in pi.iter().enumerate() {
                if grid.multi_index(k)[player] == a {
                    let c = oracle.gain(grid, k, player, t);
                    e.add_term(v, c);
                    if c != 0.0 {
                        row.push((k, c));
                    }
                }
            }
            if e.is_constant() {
                continue;
            }
            if budget.is_none() {
                rows.push(row);
            }
            if let Some(b) = budget {
                e.add_term(b, -1.0);
            }
            let w = p.add_nonneg_var();
            e.add_term(w, 1.0);
            p.add_equality(e, 0.0)?;
        }
    }
    if alpha > 0.0 {
        // Σ ε' + v' = αε
        let v = p.add_nonneg_var();
        budget_sum.add_term(v, 1.0);
        budget_sum.add_term(epsilon, -alpha);
        p.add_equality(budget_sum, 0.0)?;
    }
    Ok(rows)
}

/// The SDP of one iteration for a polynomial game on the given support.
pub fn build_iteration_sdp(
    game: &PolynomialGame,
    grid: &ProductGrid,
    alpha: f64,
) -> Result<IterationSdp, AdaptiveError> {
    if grid.num_players() != game.num_players() {
        return Err(GameError::Dimension {
            expected: game.num_players(),
            got: grid.num_players(),
        }
        .into());
    }
    build_sdp(&PolyOracle(game), grid, alpha)
}

/// Solves the iteration program: the distribution comes from a solve at
/// `center_tol`, the optimal value from a solve at `solver_tol`.
pub fn solve_iteration(
    sdp: &IterationSdp,
    solver_tol: f64,
    center_tol: f64,
) -> Result<(SupportedDistribution, f64), AdaptiveError> {
    let solve = |tol: f64| -> Result<ConicSolution, AdaptiveError> {
        let sol = sdp.problem.solve(&SolverOptions::with_tol(tol))?;
        if sol.is_optimal() || near_optimal(&sol) {
            Ok(sol)
        } else {
            Err(AdaptiveError::Solver {
                iteration: 0,
                status: sol.status,
            })
        }
    };
    let centered = solve(center_tol)?;
    let probs = project_onto_rows(
        &sdp.restricted_rows,
        sdp.pi.iter().map(|&v| centered.value(v)).collect(),
    );
    let dist = SupportedDistribution::from_solver(sdp.grid.clone(), probs)?;
    let epsilon = if solver_tol < center_tol {
        solve(solver_tol)?.scalar(sdp.epsilon)
    } else {
        centered.scalar(sdp.epsilon)
    };
    // slightly negative values are solver noise around an exact equilibrium
    Ok((dist, epsilon.max(0.0)))
}

fn row_violation(rows: &[Vec<(usize, f64)>], probs: &[f64]) -> f64 {
    rows.iter()
        .map(|r| r.iter().map(|&(k, c)| c * probs[k]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// The nearest distribution in `ℓ₁` satisfying the restricted rows exactly.
/// The center-path iterate meets them only to `center_tol`; the projection
/// moves it by about that much. Falls back to the input if the LP does not
/// improve on it.
fn project_onto_rows(rows: &[Vec<(usize, f64)>], probs: Vec<f64>) -> Vec<f64> {
    let before = row_violation(rows, &probs);
    if before <= PROJECTION_TOL {
        return probs;
    }
    let mut p = ConicProblem::new();
    let mut objective = LinExpr::new();
    let mut simplex = LinExpr::new();
    let mut pi = Vec::with_capacity(probs.len());
    let built = (|| -> Result<(), ConicError> {
        for &q in &probs {
            // π_k − d⁺ + d⁻ = q
            let (v, up, down) = (p.add_nonneg_var(), p.add_nonneg_var(), p.add_nonneg_var());
            let mut e = LinExpr::term(v, 1.0);
            e.add_term(up, -1.0).add_term(down, 1.0);
            p.add_equality(e, q)?;
            objective.add_term(up, 1.0).add_term(down, 1.0);
            simplex.add_term(v, 1.0);
            pi.push(v);
        }
        p.add_equality(simplex.clone(), 1.0)?;
        for r in rows {
            let mut e = LinExpr::term(p.add_nonneg_var(), 1.0);
            for &(k, c) in r {
                e.add_term(pi[k], c);
            }
            p.add_equality(e, 0.0)?;
        }
        p.set_objective(objective.clone())
    })();
    let Ok(sol) = built.and_then(|_| p.solve(&SolverOptions::with_tol(PROJECTION_TOL))) else {
        return probs;
    };
    if !(sol.is_optimal() || near_optimal(&sol)) {
        return probs;
    }
    let projected: Vec<f64> = pi.iter().map(|&v| sol.value(v).max(0.0)).collect();
    if row_violation(rows, &projected) < before {
        projected
    } else {
        probs
    }
}

/// Iterates returned after a stall are accepted when their measured residuals
/// are small; the problems become degenerate as `ε` approaches zero.
fn near_optimal(sol: &ConicSolution) -> bool {
    let r = sol.residuals;
    sol.status == SolveStatus::NumericalFailure
        && r.primal <= NEAR_OPTIMAL_TOL
        && r.dual <= NEAR_OPTIMAL_TOL
        && r.gap <= NEAR_OPTIMAL_TOL * (1.0 + sol.objective_value.abs())
}

fn merge_into(axis: &mut Vec<f64>, t: f64, tol: f64) -> bool {
    if axis.iter().any(|&p| (p - t).abs() <= tol) {
        return false;
    }
    axis.push(t);
    axis.sort_by(f64::total_cmp);
    true
}

fn run(
    oracle: &dyn DeviationOracle,
    initial: Vec<Vec<f64>>,
    config: &AdaptiveConfig,
) -> Result<IterationTrace, AdaptiveError> {
    config.validate()?;
    let n = oracle.num_players();
    if initial.len() != n {
        return Err(GameError::Dimension {
            expected: n,
            got: initial.len(),
        }
        .into());
    }
    let mut grid = ProductGrid::new(initial)?;
    let mut new_strategies: Vec<Vec<f64>> = grid.axes().to_vec();
    let mut iterations = Vec::new();
    let mut status = AdaptiveStatus::MaxIterations;

    for k in 0..config.max_iter {
        let sdp = build_sdp(oracle, &grid, config.alpha)?;
        let (dist, epsilon) =
            solve_iteration(&sdp, config.solver_tol, config.center_tol).map_err(|e| match e {
                AdaptiveError::Solver { status, .. } => AdaptiveError::Solver {
                    iteration: k,
                    status,
                },
                other => other,
            })?;

        let mut per_player = vec![0.0; n];
        let mut best: Vec<Vec<(f64, Vec<(f64, f64)>)>> = vec![Vec::new(); n];
        for (player, total) in per_player.iter_mut().enumerate() {
            let marginal = dist.marginal(player);
            for (a, &s_i) in grid.axis(player).iter().enumerate() {
                if marginal[a] <= 0.0 {
                    continue;
                }
                let (value, ties) = oracle.best_deviation(&dist, player, s_i)?;
                *total += value.max(0.0);
                best[player].push((value, ties));
            }
        }
        let audited = per_player.iter().copied().fold(0.0, f64::max);
        iterations.push(IterationRecord {
            k,
            grids: grid.axes().to_vec(),
            new_strategies: std::mem::take(&mut new_strategies),
            distribution: dist,
            epsilon,
            audited_epsilon: audited,
            per_player: per_player.clone(),
        });

        if epsilon <= config.eps_stop {
            status = AdaptiveStatus::Converged;
            break;
        }
        if k + 1 == config.max_iter {
            break;
        }

        // Binding players are judged against the exact ε of the π in hand,
        // which sits within solver tolerance of the SDP value.
        let slack = 1e-6 * audited.max(1.0);
        let mut axes = grid.axes().to_vec();
        let mut grew = false;
        for player in 0..n {
            let mut added = Vec::new();
            if per_player[player] >= config.beta * audited - slack {
                for (value, ties) in &best[player] {
                    if *value <= config.eps_stop {
                        continue;
                    }
                    // ties are only meaningful well above the gain itself
                    let floor = value - TIE_TOL.min(TIE_FRACTION * value);
                    for &(t, g) in ties {
                        if g >= floor && merge_into(&mut axes[player], t, config.merge_tol) {
                            added.push(t);
                        }
                    }
                }
            }
            added.sort_by(f64::total_cmp);
            grew |= !added.is_empty();
            new_strategies.push(added);
        }
        if !grew {
            if !config.degenerate {
                status = AdaptiveStatus::Stalled;
                break;
            }
            status = AdaptiveStatus::Stalled;
        } else {
            status = AdaptiveStatus::MaxIterations;
        }
        grid = ProductGrid::new(axes)?;
    }
    Ok(IterationTrace { iterations, status })
}

/// Adaptive discretization of a polynomial game from the given initial grids.
pub fn run_adaptive(
    game: &PolynomialGame,
    initial: Vec<Vec<f64>>,
    config: &AdaptiveConfig,
) -> Result<IterationTrace, AdaptiveError> {
    run(&PolyOracle(game), initial, config)
}

/// The same loop for a finite game, with deviations ranging over all of its
/// strategies. Initial subsets are given as strategy values.
pub fn run_adaptive_finite(
    game: &FiniteGame,
    initial: Vec<Vec<f64>>,
    config: &AdaptiveConfig,
) -> Result<IterationTrace, AdaptiveError> {
    for (player, axis) in initial.iter().enumerate() {
        for &v in axis {
            if game.grid().position(player, v).is_none() {
                return Err(GameError::NotAGridPoint { player, value: v }.into());
            }
        }
    }
    run(&FiniteOracle(game), initial, config)
}
