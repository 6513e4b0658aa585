use crate::game::{FiniteGame, GameError, PolynomialGame, ProductGrid, SupportedDistribution};
use crate::maximize::maximize_univariate;
use crate::poly::MultiPoly;
use polyce_conic::{ConicError, ConicProblem, LinExpr, SolveStatus, SolverOptions};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CeError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Conic(#[from] ConicError),
    #[error("solver finished with status {0:?}")]
    Solver(SolveStatus),
    #[error("objective has {got} entries for {expected} cells")]
    ObjectiveShape { expected: usize, got: usize },
    #[error("grid size must be at least 1")]
    EmptyGrid,
}

/// Objective over the cells of a finite game.
#[derive(Clone, Debug, PartialEq)]
pub enum CeObjective {
    /// Any equilibrium; ties are broken by minimizing the largest cell
    /// probability.
    Feasibility,
    /// Minimize `Σ c_s π(s)` over equilibria.
    Minimize(Vec<f64>),
}

/// One incentive constraint `Σ_{s₋ᵢ} π(sᵢ, s₋ᵢ) [uᵢ(tᵢ, s₋ᵢ) − uᵢ(s)] ≤ 0`, as
/// sparse coefficients over flat cell indices.
#[derive(Clone, Debug)]
pub struct IncentiveRow {
    pub player: usize,
    pub recommended: usize,
    pub deviation: usize,
    pub coeffs: Vec<(usize, f64)>,
}

/// All incentive constraints of a finite game, skipping rows that vanish.
pub fn incentive_rows(fg: &FiniteGame) -> Vec<IncentiveRow> {
    let grid = fg.grid();
    let mut rows = Vec::new();
    for player in 0..fg.num_players() {
        let m = grid.axis(player).len();
        for recommended in 0..m {
            for deviation in (0..m).filter(|&t| t != recommended) {
                let mut coeffs = Vec::new();
                for k in 0..grid.len() {
                    let mut idx = grid.multi_index(k);
                    if idx[player] != recommended {
                        continue;
                    }
                    let here = fg.payoff(player, &idx);
                    idx[player] = deviation;
                    let gain = fg.payoff(player, &idx) - here;
                    if gain != 0.0 {
                        coeffs.push((k, gain));
                    }
                }
                if !coeffs.is_empty() {
                    rows.push(IncentiveRow {
                        player,
                        recommended,
                        deviation,
                        coeffs,
                    });
                }
            }
        }
    }
    rows
}

/// Largest incentive-constraint value of `probs` (positive means violated).
pub fn ce_violation(fg: &FiniteGame, probs: &[f64]) -> f64 {
    incentive_rows(fg)
        .iter()
        .map(|r| r.coeffs.iter().map(|&(k, c)| c * probs[k]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A correlated equilibrium of a finite game.
///
/// The LP is solved through its dual so that the Newton system is indexed by
/// cells rather than incentive constraints; the distribution is read off the
/// equality multipliers.
pub fn ce_lp(fg: &FiniteGame, objective: &CeObjective) -> Result<SupportedDistribution, CeError> {
    let cells = fg.grid().len();
    if let CeObjective::Minimize(c) = objective {
        if c.len() != cells {
            return Err(CeError::ObjectiveShape {
                expected: cells,
                got: c.len(),
            });
        }
    }
    let mut p = ConicProblem::new();
    let nu = p.add_scalar_var();
    let mut cell_rows: Vec<LinExpr> = (0..cells)
        .map(|_| {
            let mut e = LinExpr::new();
            e.add_term(nu, -1.0);
            e
        })
        .collect();
    for row in incentive_rows(fg) {
        let lambda = p.add_nonneg_var();
        for (k, c) in row.coeffs {
            cell_rows[k].add_term(lambda, c);
        }
    }
    let mut theta_sum = LinExpr::new();
    for e in cell_rows.iter_mut() {
        let sigma = p.add_nonneg_var();
        e.add_term(sigma, -1.0);
        if *objective == CeObjective::Feasibility {
            // θ_s pairs with the bound π(s) ≤ m
            let theta = p.add_nonneg_var();
            e.add_term(theta, 1.0);
            theta_sum.add_term(theta, 1.0);
        }
    }
    let rhs: Vec<f64> = match objective {
        CeObjective::Feasibility => vec![0.0; cells],
        CeObjective::Minimize(c) => c.iter().map(|v| -v).collect(),
    };
    let ids = cell_rows
        .into_iter()
        .zip(&rhs)
        .map(|(e, &b)| p.add_equality(e, b))
        .collect::<Result<Vec<_>, _>>()?;
    if *objective == CeObjective::Feasibility {
        p.add_equality(theta_sum, 1.0)?;
    }
    p.set_objective(LinExpr::term(nu, -1.0))?;
    let sol = p.solve(&SolverOptions::with_tol(1e-8))?;
    if !sol.is_optimal() {
        return Err(CeError::Solver(sol.status));
    }
    let probs = ids.iter().map(|&id| sol.dual(id)).collect();
    Ok(SupportedDistribution::from_solver(
        fg.grid().clone(),
        probs,
    )?)
}

/// Exact maximal deviation gain for one recommendation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecommendationGain {
    pub player: usize,
    pub recommended: f64,
    /// `ε_{i,sᵢ} = max_t g_{i,sᵢ}(t)`, clamped at zero.
    pub epsilon: f64,
    /// Smallest maximizing deviation.
    pub t_star: f64,
    pub maximizers: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonReport {
    /// `max_i Σ_{sᵢ} ε_{i,sᵢ}`.
    pub epsilon: f64,
    pub per_player: Vec<f64>,
    pub per_recommendation: Vec<RecommendationGain>,
}

/// The smallest `ε` for which `dist` is an ε-correlated equilibrium of the
/// polynomial game, with each recommendation's gain maximized exactly.
pub fn min_epsilon(
    game: &PolynomialGame,
    dist: &SupportedDistribution,
) -> Result<EpsilonReport, GameError> {
    let n = game.num_players();
    let mut per_player = vec![0.0; n];
    let mut per_recommendation = Vec::new();
    for (player, total) in per_player.iter_mut().enumerate() {
        let marginal = dist.marginal(player);
        for (a, &s_i) in dist.grid().axis(player).iter().enumerate() {
            if marginal[a] <= 0.0 {
                continue;
            }
            let g = game.deviation_gain_coeffs(player, dist, s_i)?;
            let m = maximize_univariate(&g);
            let eps = m.value.max(0.0);
            *total += eps;
            per_recommendation.push(RecommendationGain {
                player,
                recommended: s_i,
                epsilon: eps,
                t_star: m.t_star,
                maximizers: m.maximizers,
            });
        }
    }
    Ok(EpsilonReport {
        epsilon: per_player.iter().copied().fold(0.0, f64::max),
        per_player,
        per_recommendation,
    })
}

/// Centers of `d` equal subintervals of `[-1, 1]`.
pub fn midpoint_grid(d: usize) -> Vec<f64> {
    (0..d)
        .map(|k| -1.0 + (2 * k + 1) as f64 / d as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridRule {
    #[default]
    Midpoints,
    /// Midpoints plus `±1`. Exploratory: endpoint inclusion has no proven rate.
    MidpointsWithEndpoints,
}

impl GridRule {
    pub fn points(self, d: usize) -> Vec<f64> {
        let mut g = midpoint_grid(d);
        if self == GridRule::MidpointsWithEndpoints {
            g.insert(0, -1.0);
            g.push(1.0);
        }
        g
    }
}

/// Objective for the sampled game, as a polynomial evaluated on each cell.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyObjective {
    Feasibility,
    Minimize(MultiPoly),
}

#[derive(Clone, Debug, Serialize)]
pub struct StaticResult {
    pub d: usize,
    pub distribution: SupportedDistribution,
    pub report: EpsilonReport,
    pub expected_utilities: Vec<f64>,
}

/// Solves the game sampled on a `d`-point grid per player and measures the
/// result against the continuous game.
pub fn static_discretization(
    game: &PolynomialGame,
    d: usize,
    objective: &PolyObjective,
    rule: GridRule,
) -> Result<StaticResult, CeError> {
    if d == 0 {
        return Err(CeError::EmptyGrid);
    }
    let grid = ProductGrid::new(vec![rule.points(d); game.num_players()])?;
    let fg = game.sample(&grid)?;
    let obj = match objective {
        PolyObjective::Feasibility => CeObjective::Feasibility,
        PolyObjective::Minimize(f) => {
            CeObjective::Minimize((0..grid.len()).map(|k| f.eval(&grid.point(k))).collect())
        }
    };
    let distribution = ce_lp(&fg, &obj)?;
    let report = min_epsilon(game, &distribution)?;
    let expected_utilities = game
        .utilities()
        .iter()
        .map(|u| distribution.expectation(u))
        .collect();
    Ok(StaticResult {
        d,
        distribution,
        report,
        expected_utilities,
    })
}

/// CSV with columns `d, epsilon, u_<player>...`.
pub fn static_sweep_csv(game: &PolynomialGame, rows: &[StaticResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["d".to_string(), "epsilon".to_string()];
    header.extend(game.players().iter().map(|p| format!("u_{p}")));
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        let mut rec = vec![r.d.to_string(), format!("{:.10e}", r.report.epsilon)];
        rec.extend(r.expected_utilities.iter().map(|u| format!("{u:.10}")));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoints() {
        assert_eq!(midpoint_grid(1), vec![0.0]);
        assert_eq!(midpoint_grid(4), vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(
            GridRule::MidpointsWithEndpoints.points(2),
            vec![-1.0, -0.5, 0.5, 1.0]
        );
    }
}
