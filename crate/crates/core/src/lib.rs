//! Correlated equilibria of polynomial games on `[-1, 1]^n`.
//!
//! Three solution methods share the game model:
//! - [`finite_ce::static_discretization`] solves the game sampled on a fixed grid;
//! - [`adaptive::run_adaptive`] grows a finite support until no deviation gains;
//! - [`moments::payoff_bounds`] bounds equilibrium payoffs with moment relaxations.
//!
//! Nonnegativity on the interval is certified with Gram matrices in [`sos`],
//! and all optimization goes through [`polyce_conic`].

pub mod adaptive;
pub mod finite_ce;
pub mod fixtures;
pub mod game;
pub mod maximize;
pub mod moments;
pub mod poly;
pub mod randgame;
pub mod sos;

pub use finite_ce::{ce_lp, min_epsilon, static_discretization, CeObjective, EpsilonReport};
pub use game::{
    parse_game, serialize_game, FiniteGame, GameError, PolynomialGame, ProductGrid,
    SupportedDistribution,
};
pub use maximize::maximize_univariate;
pub use poly::MultiPoly;
