//! Small games used by tests, examples and the CLI's bundled game files.

use crate::game::{FiniteGame, PolynomialGame};
use crate::poly::MultiPoly;

/// Two-player quadratic game whose only correlated equilibrium is the point
/// mass at `(1, 1)`.
pub fn unique_ce_quadratic() -> PolynomialGame {
    let ux = MultiPoly::from_terms(
        2,
        [
            (vec![2, 0], 0.596),
            (vec![1, 1], 2.072),
            (vec![0, 2], -0.394),
            (vec![1, 0], 1.360),
            (vec![0, 1], -1.200),
            (vec![0, 0], 0.554),
        ],
    );
    let uy = MultiPoly::from_terms(
        2,
        [
            (vec![2, 0], -0.108),
            (vec![1, 1], 1.918),
            (vec![0, 2], -1.044),
            (vec![1, 0], -1.232),
            (vec![0, 1], 0.842),
            (vec![0, 0], -1.886),
        ],
    );
    PolynomialGame::with_default_names(vec![ux, uy]).expect("two utilities in two variables")
}

/// Common-payoff game `(1−x²)(3y²+6y+5) + (1−y²)(3x²+6x+5)`. On the grid
/// `{−1, 0, 1}²` it reproduces [`stuck_finite_game`] scaled by two.
pub fn embedded_trap() -> PolynomialGame {
    let one_minus = |v: usize| {
        let mut e = vec![0, 0];
        e[v] = 2;
        MultiPoly::from_terms(2, [(vec![0, 0], 1.0), (e, -1.0)])
    };
    let quad = |v: usize| {
        let (mut e2, mut e1) = (vec![0, 0], vec![0, 0]);
        e2[v] = 2;
        e1[v] = 1;
        MultiPoly::from_terms(2, [(e2, 3.0), (e1, 6.0), (vec![0, 0], 5.0)])
    };
    let u = &(&one_minus(0) * &quad(1)) + &(&one_minus(1) * &quad(0));
    PolynomialGame::with_default_names(vec![u.clone(), u]).expect("two utilities in two variables")
}

/// Symmetric identical-interest 3×3 game on which support growth with the
/// relaxed restricted-deviation constraint gets stuck. Strategies `a, b, c`
/// sit at `−1, 0, 1`.
pub fn stuck_finite_game() -> FiniteGame {
    let table = vec![
        vec![0.0, 1.0, 0.0],
        vec![1.0, 5.0, 7.0],
        vec![0.0, 7.0, 0.0],
    ];
    FiniteGame::bimatrix(vec![-1.0, 0.0, 1.0], vec![-1.0, 0.0, 1.0], &table, &table)
        .expect("3×3 tables")
}

/// Game whose utilities are constant, so every distribution is an equilibrium.
pub fn constant_game(players: usize, value: f64) -> PolynomialGame {
    PolynomialGame::with_default_names(
        (0..players)
            .map(|_| MultiPoly::constant(players, value))
            .collect(),
    )
    .expect("constant utilities")
}
