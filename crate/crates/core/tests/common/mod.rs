//! Oracles that recompute equilibrium quantities from first principles,
//! without the library's gain polynomials, incentive rows or root finder.
#![allow(dead_code)]

use polyce::{FiniteGame, PolynomialGame, SupportedDistribution};

/// Every map from `m` strategies to themselves, as lookup tables.
fn departure_functions(m: usize) -> Vec<Vec<usize>> {
    let total = m.pow(m as u32);
    (0..total)
        .map(|mut code| {
            (0..m)
                .map(|_| {
                    let v = code % m;
                    code /= m;
                    v
                })
                .collect()
        })
        .collect()
}

/// Largest expected gain `Σ_s π(s) [u_i(f(s_i), s₋ᵢ) − u_i(s)]` over players
/// and all departure functions `f`. A correlated equilibrium has this ≤ 0.
pub fn max_departure_gain(fg: &FiniteGame, probs: &[f64]) -> f64 {
    let grid = fg.grid();
    let mut worst = f64::NEG_INFINITY;
    for player in 0..fg.num_players() {
        for f in departure_functions(grid.axis(player).len()) {
            let mut gain = 0.0;
            for (k, &p) in probs.iter().enumerate() {
                let mut idx = grid.multi_index(k);
                let here = fg.payoff(player, &idx);
                idx[player] = f[idx[player]];
                gain += p * (fg.payoff(player, &idx) - here);
            }
            worst = worst.max(gain);
        }
    }
    worst
}

/// Maximum of `f` over `[-1, 1]` by dense sampling followed by golden-section
/// refinement around each sampled local maximum.
pub fn maximize_on_interval(f: impl Fn(f64) -> f64) -> (f64, f64) {
    const SAMPLES: usize = 4001;
    let h = 2.0 / (SAMPLES - 1) as f64;
    let xs: Vec<f64> = (0..SAMPLES).map(|k| -1.0 + h * k as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = (xs[0], ys[0]);
    for k in 0..SAMPLES {
        let left = if k == 0 { f64::NEG_INFINITY } else { ys[k - 1] };
        let right = if k + 1 == SAMPLES {
            f64::NEG_INFINITY
        } else {
            ys[k + 1]
        };
        if ys[k] < left || ys[k] < right {
            continue;
        }
        let (mut a, mut b) = ((xs[k] - h).max(-1.0), (xs[k] + h).min(1.0));
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) >= f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        for x in [xs[k], 0.5 * (a + b)] {
            let y = f(x);
            if y > best.1 {
                best = (x, y);
            }
        }
    }
    best
}

/// `max_i Σ_{s_i} max_t Σ_{s₋ᵢ} π(s) [u_i(t, s₋ᵢ) − u_i(s)]`, evaluating
/// utilities pointwise.
pub fn epsilon_by_direct_maximization(game: &PolynomialGame, dist: &SupportedDistribution) -> f64 {
    let grid = dist.grid();
    let mut eps = 0.0f64;
    for player in 0..game.num_players() {
        let mut total = 0.0;
        for a in 0..grid.axis(player).len() {
            let cells: Vec<(Vec<f64>, f64)> = (0..grid.len())
                .filter(|&k| grid.multi_index(k)[player] == a && dist.probs()[k] > 0.0)
                .map(|k| (grid.point(k), dist.probs()[k]))
                .collect();
            if cells.is_empty() {
                continue;
            }
            let gain = |t: f64| {
                cells
                    .iter()
                    .map(|(s, p)| {
                        let mut dev = s.clone();
                        dev[player] = t;
                        p * (game.eval_utility(player, &dev).unwrap()
                            - game.eval_utility(player, s).unwrap())
                    })
                    .sum::<f64>()
            };
            total += maximize_on_interval(gain).1.max(0.0);
        }
        eps = eps.max(total);
    }
    eps
}
