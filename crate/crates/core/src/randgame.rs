//! Seeded random polynomial games with standard normal coefficients.

use crate::game::PolynomialGame;
use crate::poly::MultiPoly;
use crate::sos::graded_monomials;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_PLAYERS: usize = 3;
pub const DEFAULT_DEGREE: u32 = 4;

/// Every monomial of total degree `≤ degree` in every utility gets an
/// independent `N(0, 1)` coefficient. Deterministic in `seed`.
pub fn random_game(players: usize, degree: u32, seed: u64) -> PolynomialGame {
    assert!(players >= 1, "a game needs at least one player");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monomials = graded_monomials(players, degree);
    let utilities = (0..players)
        .map(|_| {
            MultiPoly::from_terms(
                players,
                monomials
                    .iter()
                    .map(|e| (e.clone(), StandardNormal.sample(&mut rng)))
                    .collect::<Vec<(Vec<u32>, f64)>>(),
            )
        })
        .collect();
    PolynomialGame::with_default_names(utilities).expect("utilities match the player count")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_game() {
        let a = random_game(3, 4, 11);
        let b = random_game(3, 4, 11);
        assert_eq!(a.to_json(), b.to_json());
        assert_ne!(a.to_json(), random_game(3, 4, 12).to_json());
    }

    #[test]
    fn has_every_monomial() {
        let g = random_game(2, 4, 0);
        for u in g.utilities() {
            assert_eq!(u.num_terms(), 15);
            assert_eq!(u.total_degree(), 4);
        }
    }
}
