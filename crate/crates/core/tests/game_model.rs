use approx::assert_abs_diff_eq;
use polyce::fixtures::{embedded_trap, unique_ce_quadratic};
use polyce::game::{GameError, ProductGrid};
use polyce::{parse_game, serialize_game, MultiPoly, PolynomialGame, SupportedDistribution};
use proptest::prelude::*;

#[test]
fn utilities_at_the_equilibrium_corner() {
    let g = unique_ce_quadratic();
    // at (1, 1) every monomial is 1
    let ux: f64 = [0.596, 2.072, -0.394, 1.360, -1.200, 0.554].iter().sum();
    let uy: f64 = [-0.108, 1.918, -1.044, -1.232, 0.842, -1.886].iter().sum();
    assert_abs_diff_eq!(g.eval_utility(0, &[1.0, 1.0]).unwrap(), ux, epsilon = 1e-12);
    assert_abs_diff_eq!(
        g.eval_utility(0, &[1.0, 1.0]).unwrap(),
        2.988,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(g.eval_utility(1, &[1.0, 1.0]).unwrap(), uy, epsilon = 1e-12);
    assert_abs_diff_eq!(
        g.eval_utility(1, &[1.0, 1.0]).unwrap(),
        -1.510,
        epsilon = 1e-12
    );
    assert_eq!(embedded_trap().eval_utility(0, &[-1.0, -1.0]).unwrap(), 0.0);
}

#[test]
fn eval_rejects_bad_points() {
    let g = unique_ce_quadratic();
    assert_eq!(
        g.eval_utility(0, &[0.0]),
        Err(GameError::Dimension {
            expected: 2,
            got: 1
        })
    );
    assert!(matches!(
        g.eval_utility(0, &[0.0, 1.5]),
        Err(GameError::OutOfRange { index: 1, .. })
    ));
    assert!(matches!(
        g.eval_utility(0, &[f64::NAN, 0.0]),
        Err(GameError::OutOfRange { index: 0, .. })
    ));
    assert_eq!(
        g.eval_utility(2, &[0.0, 0.0]),
        Err(GameError::NoSuchPlayer(2))
    );
}

#[test]
fn deviation_gain_examples() {
    let g = unique_ce_quadratic();
    let origin = SupportedDistribution::point_mass(&[0.0, 0.0]).unwrap();
    let gain = g.deviation_gain_coeffs(0, &origin, 0.0).unwrap();
    assert_abs_diff_eq!(gain[0], 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(gain[1], 1.360, epsilon = 1e-15);
    assert_abs_diff_eq!(gain[2], 0.596, epsilon = 1e-15);

    let e = embedded_trap();
    let corner = SupportedDistribution::point_mass(&[-1.0, -1.0]).unwrap();
    let gain = e.deviation_gain_poly(0, &corner, -1.0).unwrap();
    assert_eq!(gain.univariate_coeffs(), vec![2.0, 0.0, -2.0]);

    assert!(matches!(
        g.deviation_gain_coeffs(0, &origin, 0.5),
        Err(GameError::NotAGridPoint { player: 0, .. })
    ));
}

#[test]
fn sampled_embedded_game_is_the_scaled_table() {
    let fg = embedded_trap()
        .sample_game(vec![vec![-1.0, 0.0], vec![-1.0, 0.0]])
        .unwrap();
    for p in 0..2 {
        assert_eq!(fg.payoffs(p), &[0.0, 2.0, 2.0, 10.0]);
    }
    let single = unique_ce_quadratic()
        .sample_game(vec![vec![0.5], vec![-0.5]])
        .unwrap();
    assert_eq!(single.grid().len(), 1);
    assert_eq!(
        single.payoff(1, &[0, 0]),
        unique_ce_quadratic().eval_utility(1, &[0.5, -0.5]).unwrap()
    );
    assert_eq!(
        unique_ce_quadratic()
            .sample_game(vec![vec![], vec![0.0]])
            .unwrap_err(),
        GameError::EmptyGrid(0)
    );
}

#[test]
fn grids_merge_near_duplicates() {
    let g = ProductGrid::new(vec![vec![0.5, -0.5, 0.5 + 1e-10]]).unwrap();
    assert_eq!(g.axis(0), &[-0.5, 0.5]);
    assert!(ProductGrid::new(vec![vec![1.5]]).is_err());
}

#[test]
fn distribution_invariants() {
    let grid = ProductGrid::new(vec![vec![0.0, 1.0]]).unwrap();
    assert!(SupportedDistribution::new(grid.clone(), vec![0.5, 0.5]).is_ok());
    assert!(SupportedDistribution::new(grid.clone(), vec![0.6, 0.5]).is_err());
    assert!(SupportedDistribution::new(grid.clone(), vec![-0.1, 1.1]).is_err());
    let clipped = SupportedDistribution::from_solver(grid, vec![-1e-12, 1.0 + 1e-12]).unwrap();
    assert_eq!(clipped.probs(), &[0.0, 1.0]);
}

#[test]
fn distribution_json_round_trip() {
    let d = SupportedDistribution::from_atoms(&[(vec![0.0, 1.0], 0.25), (vec![1.0, 0.0], 0.75)])
        .unwrap();
    let text = serde_json::to_string(&d).unwrap();
    let back: SupportedDistribution = serde_json::from_str(&text).unwrap();
    assert_eq!(back, d);
}

#[test]
fn game_documents_round_trip() {
    let g = unique_ce_quadratic();
    let text = serialize_game(&g);
    let back = parse_game(&text).unwrap();
    assert_eq!(back, g);
    assert_eq!(serialize_game(&back), text);

    let e = parse_game(&serialize_game(&embedded_trap())).unwrap();
    assert_eq!(e.eval_utility(0, &[0.0, 0.0]).unwrap(), 10.0);
}

#[test]
fn malformed_documents_are_rejected() {
    let three_exps = r#"{"players":["x","y"],"utilities":[
        {"terms":[{"exp":[1,0,0],"coef":1.0}]},
        {"terms":[{"exp":[0,1],"coef":1.0}]}]}"#;
    assert!(matches!(
        parse_game(three_exps),
        Err(GameError::ExponentLength {
            term: 0,
            len: 3,
            expected: 2,
            ..
        })
    ));
    assert!(matches!(parse_game("{"), Err(GameError::Malformed(_))));
    let missing = r#"{"players":["x","y"],"utilities":[{"terms":[]}]}"#;
    assert!(matches!(
        parse_game(missing),
        Err(GameError::PlayerCount { .. })
    ));
}

fn arb_poly(n: usize, max_deg: u32) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0..=max_deg, n), -3.0f64..3.0), 1..8)
        .prop_map(move |terms| MultiPoly::from_terms(n, terms))
}

fn arb_game() -> impl Strategy<Value = PolynomialGame> {
    (2usize..=3).prop_flat_map(|n| {
        prop::collection::vec(arb_poly(n, 3), n)
            .prop_map(|us| PolynomialGame::with_default_names(us).unwrap())
    })
}

/// A game with a random distribution on a random grid.
fn arb_setup() -> impl Strategy<Value = (PolynomialGame, SupportedDistribution)> {
    arb_game().prop_flat_map(|g| {
        let n = g.num_players();
        let axes = prop::collection::vec(prop::collection::vec(-1.0f64..=1.0, 1..4), n);
        (Just(g), axes).prop_flat_map(|(g, axes)| {
            let grid = ProductGrid::new(axes).unwrap();
            let cells = grid.len();
            (
                Just(g),
                Just(grid),
                prop::collection::vec(0.0f64..1.0, cells),
            )
                .prop_map(|(g, grid, w)| {
                    let total: f64 = w.iter().sum::<f64>() + 1e-9;
                    let probs = w
                        .iter()
                        .map(|x| (x + 1e-9 / w.len() as f64) / total)
                        .collect();
                    (g, SupportedDistribution::from_solver(grid, probs).unwrap())
                })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_vanishes_at_the_recommendation((g, dist) in arb_setup()) {
        for i in 0..g.num_players() {
            for &s in dist.grid().axis(i) {
                let c = g.deviation_gain_coeffs(i, &dist, s).unwrap();
                let v = polyce::poly::univariate::eval(&c, s);
                prop_assert!(v.abs() <= 1e-12, "g({s}) = {v}");
            }
        }
    }

    #[test]
    fn gain_matches_the_explicit_sum((g, dist) in arb_setup(), t in -1.0f64..=1.0) {
        let grid = dist.grid();
        for i in 0..g.num_players() {
            for (a, &s) in grid.axis(i).iter().enumerate() {
                let c = g.deviation_gain_coeffs(i, &dist, s).unwrap();
                let mut explicit = 0.0;
                for k in 0..grid.len() {
                    if grid.multi_index(k)[i] != a {
                        continue;
                    }
                    let point = grid.point(k);
                    let mut dev = point.clone();
                    dev[i] = t;
                    explicit += dist.probs()[k]
                        * (g.eval_utility(i, &dev).unwrap() - g.eval_utility(i, &point).unwrap());
                }
                let v = polyce::poly::univariate::eval(&c, t);
                prop_assert!((v - explicit).abs() <= 1e-10, "{v} vs {explicit}");
            }
        }
    }

    #[test]
    fn sampling_equals_evaluation((g, dist) in arb_setup()) {
        let fg = g.sample(dist.grid()).unwrap();
        for k in 0..dist.grid().len() {
            let idx = dist.grid().multi_index(k);
            for i in 0..g.num_players() {
                prop_assert_eq!(
                    fg.payoff(i, &idx),
                    g.eval_utility(i, &dist.grid().point(k)).unwrap()
                );
            }
        }
    }

    #[test]
    fn documents_round_trip(g in arb_game()) {
        prop_assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
    }
}
