use crate::poly::{monomial_value, MultiPoly};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid points closer than this are treated as the same strategy.
pub const GRID_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("point has {got} coordinates but the game has {expected} players")]
    Dimension { expected: usize, got: usize },
    #[error("coordinate {index} = {value} lies outside [-1, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("no player with index {0}")]
    NoSuchPlayer(usize),
    #[error("{value} is not a grid point of player {player}")]
    NotAGridPoint { player: usize, value: f64 },
    #[error("player {0} has an empty grid")]
    EmptyGrid(usize),
    #[error("grid point {value} of player {player} is outside [-1, 1] or not finite")]
    GridOutOfRange { player: usize, value: f64 },
    #[error("expected {expected} entries over the product grid, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("invalid probabilities: {0}")]
    Probabilities(String),
    #[error("malformed game document: {0}")]
    Malformed(String),
    #[error("{players} player names but {utilities} utilities")]
    PlayerCount { players: usize, utilities: usize },
    #[error("utility of player '{player}', term {term}: {len} exponents for {expected} players")]
    ExponentLength {
        player: String,
        term: usize,
        len: usize,
        expected: usize,
    },
    #[error("utility of player '{player}', term {term}: coefficient is not finite")]
    NonFinite { player: String, term: usize },
}

/// Finite strategy sets for every player, one sorted axis per player.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGrid {
    axes: Vec<Vec<f64>>,
}

impl ProductGrid {
    /// Sorts each axis and merges points closer than [`GRID_MERGE_TOL`].
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let mut out = Vec::with_capacity(axes.len());
        for (player, mut axis) in axes.into_iter().enumerate() {
            if axis.is_empty() {
                return Err(GameError::EmptyGrid(player));
            }
            if let Some(&value) = axis.iter().find(|v| !(v.abs() <= 1.0)) {
                return Err(GameError::GridOutOfRange { player, value });
            }
            axis.sort_by(f64::total_cmp);
            axis.dedup_by(|b, a| (*b - *a).abs() <= GRID_MERGE_TOL);
            out.push(axis);
        }
        Ok(ProductGrid { axes: out })
    }

    pub fn num_players(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, player: usize) -> &[f64] {
        &self.axes[player]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Number of cells in the product.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major position of a cell (last player varies fastest).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, axis)| acc * axis.len() + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (slot, axis) in idx.iter_mut().zip(&self.axes).rev() {
            *slot = flat % axis.len();
            flat /= axis.len();
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, axis)| axis[i])
            .collect()
    }

    /// Index of `value` on the player's axis, up to [`GRID_MERGE_TOL`].
    pub fn position(&self, player: usize, value: f64) -> Option<usize> {
        self.axes
            .get(player)?
            .iter()
            .position(|&p| (p - value).abs() <= GRID_MERGE_TOL)
    }
}

/// Payoff tensors of a finite game, stored flat in [`ProductGrid`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteGame {
    grid: ProductGrid,
    payoffs: Vec<Vec<f64>>,
}

impl FiniteGame {
    pub fn new(grid: ProductGrid, payoffs: Vec<Vec<f64>>) -> Result<Self, GameError> {
        if payoffs.len() != grid.num_players() {
            return Err(GameError::Shape {
                expected: grid.num_players(),
                got: payoffs.len(),
            });
        }
        for p in &payoffs {
            if p.len() != grid.len() {
                return Err(GameError::Shape {
                    expected: grid.len(),
                    got: p.len(),
                });
            }
        }
        Ok(FiniteGame { grid, payoffs })
    }

    /// Two-player game from row-player and column-player payoff tables.
    pub fn bimatrix(
        rows: Vec<f64>,
        cols: Vec<f64>,
        u_row: &[Vec<f64>],
        u_col: &[Vec<f64>],
    ) -> Result<Self, GameError> {
        let grid = ProductGrid::new(vec![rows, cols])?;
        let flatten = |t: &[Vec<f64>]| t.iter().flatten().copied().collect::<Vec<_>>();
        Self::new(grid, vec![flatten(u_row), flatten(u_col)])
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn num_players(&self) -> usize {
        self.grid.num_players()
    }

    pub fn payoff(&self, player: usize, idx: &[usize]) -> f64 {
        self.payoffs[player][self.grid.flat_index(idx)]
    }

    pub fn payoffs(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }
}

/// A probability distribution on a product grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportedDistribution {
    grid: ProductGrid,
    probs: Vec<f64>,
}

impl SupportedDistribution {
    pub fn new(grid: ProductGrid, probs: Vec<f64>) -> Result<Self, GameError> {
        if probs.len() != grid.len() {
            return Err(GameError::Shape {
                expected: grid.len(),
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(GameError::Probabilities(format!("entry {p} is negative")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(GameError::Probabilities(format!("entries sum to {total}")));
        }
        Ok(SupportedDistribution { grid, probs })
    }

    /// Clips tiny negative entries from numerical solvers and renormalizes.
    pub fn from_solver(grid: ProductGrid, probs: Vec<f64>) -> Result<Self, GameError> {
        let clipped: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if !(total > 0.0) {
            return Err(GameError::Probabilities("no positive mass".into()));
        }
        Self::new(grid, clipped.iter().map(|p| p / total).collect())
    }

    pub fn point_mass(point: &[f64]) -> Result<Self, GameError> {
        let grid = ProductGrid::new(point.iter().map(|&p| vec![p]).collect())?;
        Self::new(grid, vec![1.0])
    }

    /// Distribution given as `(point, probability)` atoms; the grid is the
    /// product of the coordinates that occur.
    pub fn from_atoms(atoms: &[(Vec<f64>, f64)]) -> Result<Self, GameError> {
        let n = atoms.first().map_or(0, |a| a.0.len());
        let axes = (0..n)
            .map(|i| atoms.iter().map(|a| a.0[i]).collect())
            .collect();
        let grid = ProductGrid::new(axes)?;
        let mut probs = vec![0.0; grid.len()];
        for (point, p) in atoms {
            if point.len() != n {
                return Err(GameError::Dimension {
                    expected: n,
                    got: point.len(),
                });
            }
            let idx: Vec<usize> = point
                .iter()
                .enumerate()
                .map(|(i, &v)| grid.position(i, v).expect("coordinate is on its axis"))
                .collect();
            probs[grid.flat_index(&idx)] += p;
        }
        Self::new(grid, probs)
    }

    pub fn grid(&self) -> &ProductGrid {
        &self.grid
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, idx: &[usize]) -> f64 {
        self.probs[self.grid.flat_index(idx)]
    }

    /// Atoms with positive probability, in grid order.
    pub fn support(&self) -> Vec<(Vec<f64>, f64)> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (self.grid.point(k), p))
            .collect()
    }

    pub fn marginal(&self, player: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.axis(player).len()];
        for (k, &p) in self.probs.iter().enumerate() {
            out[self.grid.multi_index(k)[player]] += p;
        }
        out
    }

    /// `∫ f dπ` for a polynomial `f` in the players' strategies.
    pub fn expectation(&self, f: &MultiPoly) -> f64 {
        self.support().iter().map(|(s, p)| p * f.eval(s)).sum()
    }

    /// `∫ s^exp dπ`.
    pub fn moment(&self, exp: &[u32]) -> f64 {
        self.support()
            .iter()
            .map(|(s, p)| p * monomial_value(exp, s))
            .sum()
    }
}

#[derive(Serialize, Deserialize)]
struct AtomDoc {
    point: Vec<f64>,
    prob: f64,
}

#[derive(Serialize, Deserialize)]
struct DistributionDoc {
    grids: Vec<Vec<f64>>,
    support: Vec<AtomDoc>,
}

impl Serialize for SupportedDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DistributionDoc {
            grids: self.grid.axes.clone(),
            support: self
                .support()
                .into_iter()
                .map(|(point, prob)| AtomDoc { point, prob })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SupportedDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let doc = DistributionDoc::deserialize(d)?;
        let grid = ProductGrid::new(doc.grids).map_err(D::Error::custom)?;
        let mut probs = vec![0.0; grid.len()];
        for atom in doc.support {
            if atom.point.len() != grid.num_players() {
                return Err(D::Error::custom("atom dimension differs from grid"));
            }
            let mut idx = Vec::new();
            for (i, &v) in atom.point.iter().enumerate() {
                idx.push(
                    grid.position(i, v).ok_or_else(|| {
                        D::Error::custom(format!("atom coordinate {v} not on grid"))
                    })?,
                );
            }
            probs[grid.flat_index(&idx)] += atom.prob;
        }
        SupportedDistribution::new(grid, probs).map_err(D::Error::custom)
    }
}

/// An n-player game on `[-1, 1]^n` with polynomial utilities; variable `j`
/// of every utility is player `j`'s strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialGame {
    players: Vec<String>,
    utilities: Vec<MultiPoly>,
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    exp: Vec<u32>,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
struct UtilityDoc {
    terms: Vec<TermDoc>,
}

#[derive(Serialize, Deserialize)]
struct GameDoc {
    players: Vec<String>,
    utilities: Vec<UtilityDoc>,
}

impl PolynomialGame {
    pub fn new(players: Vec<String>, utilities: Vec<MultiPoly>) -> Result<Self, GameError> {
        if players.is_empty() || players.len() != utilities.len() {
            return Err(GameError::PlayerCount {
                players: players.len(),
                utilities: utilities.len(),
            });
        }
        for u in &utilities {
            if u.num_vars() != players.len() {
                return Err(GameError::Dimension {
                    expected: players.len(),
                    got: u.num_vars(),
                });
            }
        }
        Ok(PolynomialGame { players, utilities })
    }

    /// Players named `x`, `y`, `z`, then `p3`, `p4`, ...
    pub fn with_default_names(utilities: Vec<MultiPoly>) -> Result<Self, GameError> {
        let names = (0..utilities.len())
            .map(|i| match i {
                0 => "x".to_string(),
                1 => "y".to_string(),
                2 => "z".to_string(),
                _ => format!("p{i}"),
            })
            .collect();
        Self::new(names, utilities)
    }

    pub fn num_players(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn utility(&self, player: usize) -> &MultiPoly {
        &self.utilities[player]
    }

    pub fn utilities(&self) -> &[MultiPoly] {
        &self.utilities
    }

    pub fn scaled_utility(&self, player: usize, factor: f64) -> Self {
        let mut g = self.clone();
        g.utilities[player] = g.utilities[player].scale(factor);
        g
    }

    pub fn eval_utility(&self, player: usize, point: &[f64]) -> Result<f64, GameError> {
        if player >= self.num_players() {
            return Err(GameError::NoSuchPlayer(player));
        }
        if point.len() != self.num_players() {
            return Err(GameError::Dimension {
                expected: self.num_players(),
                got: point.len(),
            });
        }
        if let Some((index, &value)) = point.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0)) {
            return Err(GameError::OutOfRange { index, value });
        }
        Ok(self.utilities[player].eval(point))
    }

    /// Ascending coefficients in `t` of
    /// `g(t) = Σ_{s₋ᵢ} π(sᵢ, s₋ᵢ) [uᵢ(t, s₋ᵢ) − uᵢ(s)]`.
    pub fn deviation_gain_coeffs(
        &self,
        player: usize,
        dist: &SupportedDistribution,
        s_i: f64,
    ) -> Result<Vec<f64>, GameError> {
        if player >= self.num_players() {
            return Err(GameError::NoSuchPlayer(player));
        }
        if dist.grid().num_players() != self.num_players() {
            return Err(GameError::Dimension {
                expected: self.num_players(),
                got: dist.grid().num_players(),
            });
        }
        let pos = dist
            .grid()
            .position(player, s_i)
            .ok_or(GameError::NotAGridPoint { player, value: s_i })?;
        let u = &self.utilities[player];
        let mut out = vec![0.0; u.degree_in(player) as usize + 1];
        for (k, &p) in dist.probs().iter().enumerate() {
            if p == 0.0 || dist.grid().multi_index(k)[player] != pos {
                continue;
            }
            let s = dist.grid().point(k);
            let restricted = u.restrict_to(player, &s);
            let here = crate::poly::univariate::eval(&restricted, s[player]);
            for (c, r) in out.iter_mut().zip(&restricted) {
                *c += p * r;
            }
            out[0] -= p * here;
        }
        Ok(out)
    }

    pub fn deviation_gain_poly(
        &self,
        player: usize,
        dist: &SupportedDistribution,
        s_i: f64,
    ) -> Result<MultiPoly, GameError> {
        Ok(MultiPoly::univariate(
            &self.deviation_gain_coeffs(player, dist, s_i)?,
        ))
    }

    /// Restriction of the utilities to a product grid.
    pub fn sample(&self, grid: &ProductGrid) -> Result<FiniteGame, GameError> {
        if grid.num_players() != self.num_players() {
            return Err(GameError::Dimension {
                expected: self.num_players(),
                got: grid.num_players(),
            });
        }
        let payoffs = self
            .utilities
            .iter()
            .map(|u| (0..grid.len()).map(|k| u.eval(&grid.point(k))).collect())
            .collect();
        FiniteGame::new(grid.clone(), payoffs)
    }

    pub fn sample_game(&self, grids: Vec<Vec<f64>>) -> Result<FiniteGame, GameError> {
        self.sample(&ProductGrid::new(grids)?)
    }

    pub fn parse(text: &str) -> Result<Self, GameError> {
        let doc: GameDoc =
            serde_json::from_str(text).map_err(|e| GameError::Malformed(e.to_string()))?;
        let n = doc.players.len();
        if n == 0 || doc.utilities.len() != n {
            return Err(GameError::PlayerCount {
                players: n,
                utilities: doc.utilities.len(),
            });
        }
        let mut utilities = Vec::with_capacity(n);
        for (i, u) in doc.utilities.into_iter().enumerate() {
            let mut p = MultiPoly::zero(n);
            for (k, t) in u.terms.into_iter().enumerate() {
                if t.exp.len() != n {
                    return Err(GameError::ExponentLength {
                        player: doc.players[i].clone(),
                        term: k,
                        len: t.exp.len(),
                        expected: n,
                    });
                }
                if !t.coef.is_finite() {
                    return Err(GameError::NonFinite {
                        player: doc.players[i].clone(),
                        term: k,
                    });
                }
                p.add_term(t.exp, t.coef);
            }
            utilities.push(p);
        }
        Self::new(doc.players, utilities)
    }

    pub fn to_json(&self) -> String {
        let doc = GameDoc {
            players: self.players.clone(),
            utilities: self
                .utilities
                .iter()
                .map(|u| UtilityDoc {
                    terms: u
                        .terms()
                        .map(|(e, c)| TermDoc {
                            exp: e.to_vec(),
                            coef: c,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("game documents always serialize")
    }
}

pub fn parse_game(text: &str) -> Result<PolynomialGame, GameError> {
    PolynomialGame::parse(text)
}

pub fn serialize_game(game: &PolynomialGame) -> String {
    game.to_json()
}
